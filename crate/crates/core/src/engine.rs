//! The association engine: per-detection update, shared-density
//! bookkeeping, collapse prevention, and on-demand reclustering into
//! confirmed object estimates.
//!
//! Potential objects are micro-clusters with an information-form position
//! estimate and an accumulated confidence weight. Each detection either
//! initiates a new potential object (no neighbor within `r`) or updates
//! every neighbor it falls on, accumulating shared density between
//! co-updated pairs. Reclustering joins pairs whose shared density is
//! high relative to their weights, fuses each connected component into
//! one object, and reports everything above the weight threshold.
//!
//! A baseline mode replicates the same control flow with unit detection
//! weights and running-mean centers (no measurement covariance use),
//! for head-to-head comparison.

use crate::error::{Error, Result};
use crate::infofilter::{contribution, InfoState, MeasurementContribution};
use crate::math::{Mat2, Vec2};
use crate::spatial::RadiusIndex;
use crate::types::{
    EngineParams, EstimatedObject, IdSource, Measurement, ObjectId, PotentialObject,
    SharedDensityTable,
};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Estimator variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EngineMode {
    /// Confidence-weighted clustering with information-filter fusion.
    SodaCitron,
    /// Unit weights and running-mean centers; identical control flow.
    DbstreamBaseline,
}

/// Which member id survives when a connected component is fused.
///
/// `OldestId` (the default) keeps the smallest id, maximizing track
/// persistence. `NewestId` reproduces the effect of fusing pairs in
/// descending-id order with the lower id deleted at each step; it exists
/// for differential testing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurvivorPolicy {
    #[default]
    OldestId,
    NewestId,
}

/// Confidence-to-weight transform: `(e^{beta*pi} - 1) / (e^{beta} - 1) * w_max`.
///
/// Strictly increasing in `pi` for `beta > 0`, with `f(0) = 0` and
/// `f(1) = w_max` exactly (`exp_m1` keeps the endpoints sharp).
pub fn confidence_weight(pi: f64, beta: f64, w_max: f64) -> f64 {
    (beta * pi).exp_m1() / beta.exp_m1() * w_max
}

/// Serializable engine state; see [`Engine::snapshot`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EngineSnapshot {
    pub mode: EngineMode,
    pub params: EngineParams,
    pub survivor_policy: SurvivorPolicy,
    pub id_source: IdSource,
    pub potentials: Vec<PotentialObject>,
    pub density: SharedDensityTable,
}

/// Online data-association engine. Single-writer: updates are applied
/// strictly sequentially (collapse prevention makes the result
/// order-sensitive); clone the engine for non-destructive reclustering.
#[derive(Debug, Clone)]
pub struct Engine {
    params: EngineParams,
    mode: EngineMode,
    survivor_policy: SurvivorPolicy,
    potentials: BTreeMap<ObjectId, PotentialObject>,
    density: SharedDensityTable,
    index: RadiusIndex,
    id_source: IdSource,
}

impl Engine {
    pub fn new(params: EngineParams, mode: EngineMode) -> Result<Self> {
        params.validate()?;
        Ok(Engine {
            params,
            mode,
            survivor_policy: SurvivorPolicy::default(),
            potentials: BTreeMap::new(),
            density: SharedDensityTable::new(),
            index: RadiusIndex::new(params.r)?,
            id_source: IdSource::default(),
        })
    }

    /// Engine with defaults appropriate to the mode (`w_min` differs).
    pub fn with_defaults(mode: EngineMode) -> Self {
        let params = match mode {
            EngineMode::SodaCitron => EngineParams::default(),
            EngineMode::DbstreamBaseline => EngineParams::baseline_default(),
        };
        Engine::new(params, mode).expect("default parameters are valid")
    }

    pub fn set_survivor_policy(&mut self, policy: SurvivorPolicy) {
        self.survivor_policy = policy;
    }

    pub fn params(&self) -> &EngineParams {
        &self.params
    }

    pub fn mode(&self) -> EngineMode {
        self.mode
    }

    /// Number of live potential objects.
    pub fn n_potentials(&self) -> usize {
        self.potentials.len()
    }

    /// Live potential objects in ascending id order.
    pub fn potentials(&self) -> impl Iterator<Item = &PotentialObject> {
        self.potentials.values()
    }

    pub fn get(&self, id: ObjectId) -> Option<&PotentialObject> {
        self.potentials.get(&id)
    }

    pub fn density(&self) -> &SharedDensityTable {
        &self.density
    }

    /// Sum of accumulated weights over all potential objects,
    /// folded in ascending id order.
    pub fn total_weight(&self) -> f64 {
        self.potentials.values().map(|p| p.weight).sum()
    }

    /// Detection weight under the current mode.
    fn detection_weight(&self, pi: f64) -> f64 {
        match self.mode {
            EngineMode::SodaCitron => confidence_weight(pi, self.params.beta, self.params.w_max),
            EngineMode::DbstreamBaseline => 1.0,
        }
    }

    /// Log-odds of the (clamped) detection confidence.
    fn log_odds(&self, pi: f64) -> f64 {
        let e = self.params.eps_odds;
        let p = pi.clamp(e, 1.0 - e);
        (p / (1.0 - p)).ln()
    }

    /// Fold one measurement into the engine.
    ///
    /// Validates first and mutates nothing on invalid input. On valid
    /// input the call cannot fail; any propagated error is an internal
    /// inconsistency.
    pub fn update(&mut self, m: &Measurement) -> Result<()> {
        m.validate()?;
        let w_det = self.detection_weight(m.pi);
        let neighbors = self.index.query_within(m.z, self.params.r)?;

        if neighbors.is_empty() {
            let info = match self.mode {
                EngineMode::SodaCitron => {
                    InfoState::from_contribution(&contribution(m.z, m.r)?)
                }
                // Baseline state is the running mean with a unit-matrix
                // covariance placeholder, stored in the same information
                // layout (Y = I makes recover() the identity).
                EngineMode::DbstreamBaseline => InfoState { vec: m.z, mat: Mat2::IDENTITY },
            };
            let weight = match self.mode {
                EngineMode::SodaCitron => w_det,
                EngineMode::DbstreamBaseline => 1.0,
            };
            let id = self.id_source.next_id();
            let obj = PotentialObject::new(id, info, weight, self.log_odds(m.pi))?;
            self.index.insert(id, obj.center())?;
            self.potentials.insert(id, obj);
            return Ok(());
        }

        // Snapshot every neighbor before touching anything, so collapse
        // prevention can restore full pre-update tuples.
        let snapshots: BTreeMap<ObjectId, PotentialObject> = neighbors
            .iter()
            .map(|id| (*id, self.potentials[id].clone()))
            .collect();

        let contrib: Option<MeasurementContribution> = match self.mode {
            EngineMode::SodaCitron => Some(contribution(m.z, m.r)?),
            EngineMode::DbstreamBaseline => None,
        };

        // State updates, ascending id order.
        for &id in &neighbors {
            let p = self
                .potentials
                .get_mut(&id)
                .ok_or_else(|| Error::Internal(format!("neighbor {id} not in potential set")))?;
            let old_center = p.center();
            match (self.mode, &contrib) {
                (EngineMode::SodaCitron, Some(c)) => {
                    p.set_info(p.info.updated(c))?;
                    p.weight += w_det;
                }
                (EngineMode::DbstreamBaseline, _) => {
                    let mean = (p.info.vec * p.weight + m.z) * (1.0 / (p.weight + 1.0));
                    p.set_info(InfoState { vec: mean, mat: Mat2::IDENTITY })?;
                    p.weight += 1.0;
                }
                (EngineMode::SodaCitron, None) => unreachable!(),
            }
            let new_center = p.center();
            self.index.relocate(id, old_center, new_center)?;
        }

        // Shared density, every unordered neighbor pair.
        for (k, &i) in neighbors.iter().enumerate() {
            for &j in &neighbors[k + 1..] {
                self.density.add(i, j, w_det);
            }
        }

        // Collapse prevention: any pair of co-updated neighbors whose
        // post-update centers are within r reverts to its snapshots. The
        // shared-density increments above are kept.
        let mut to_revert: BTreeSet<ObjectId> = BTreeSet::new();
        for (k, &i) in neighbors.iter().enumerate() {
            for &j in &neighbors[k + 1..] {
                let ci = self.potentials[&i].center();
                let cj = self.potentials[&j].center();
                if ci.distance_squared(cj) < self.params.r * self.params.r {
                    to_revert.insert(i);
                    to_revert.insert(j);
                }
            }
        }
        for id in to_revert {
            let snapshot = snapshots[&id].clone();
            let current_center = self.potentials[&id].center();
            self.index.relocate(id, current_center, snapshot.center())?;
            self.potentials.insert(id, snapshot);
        }

        Ok(())
    }

    /// Connected components of the shared-density graph at the current
    /// thresholds. Nodes are all live ids; an edge joins (i, j) when both
    /// weights reach `w_min` and `d / ((w_i + w_j)/2) >= alpha`. Each
    /// component is returned as an ascending id list; components are
    /// ordered by their smallest member.
    fn components(&self) -> Result<Vec<Vec<ObjectId>>> {
        let mut adjacency: BTreeMap<ObjectId, Vec<ObjectId>> = BTreeMap::new();
        for ((i, j), d) in self.density.iter() {
            let wi = self
                .potentials
                .get(&i)
                .ok_or_else(|| Error::Internal(format!("density entry references dead id {i}")))?
                .weight;
            let wj = self
                .potentials
                .get(&j)
                .ok_or_else(|| Error::Internal(format!("density entry references dead id {j}")))?
                .weight;
            if wi < self.params.w_min || wj < self.params.w_min {
                continue;
            }
            let v = d / (0.5 * (wi + wj));
            if v >= self.params.alpha {
                adjacency.entry(i).or_default().push(j);
                adjacency.entry(j).or_default().push(i);
            }
        }

        let mut components = Vec::new();
        let mut seen: BTreeSet<ObjectId> = BTreeSet::new();
        for &start in self.potentials.keys() {
            if seen.contains(&start) {
                continue;
            }
            let mut members = Vec::new();
            let mut stack = vec![start];
            seen.insert(start);
            while let Some(id) = stack.pop() {
                members.push(id);
                if let Some(next) = adjacency.get(&id) {
                    for &n in next {
                        if seen.insert(n) {
                            stack.push(n);
                        }
                    }
                }
            }
            members.sort_unstable();
            components.push(members);
        }
        Ok(components)
    }

    /// Recluster: fuse densely connected potential objects and report
    /// everything at or above the weight threshold.
    ///
    /// Mutates the engine (fused members are deleted). Calling twice in a
    /// row yields identical output: fusion only lowers density-to-weight
    /// ratios, so the second pass finds no edges inside fused components.
    pub fn recluster(&mut self) -> Result<Vec<EstimatedObject>> {
        for component in self.components()? {
            if component.len() < 2 {
                continue;
            }
            let survivor = match self.survivor_policy {
                SurvivorPolicy::OldestId => component[0],
                SurvivorPolicy::NewestId => *component.last().expect("component non-empty"),
            };

            // Element-wise sums over members in ascending id order (the
            // baseline fuses to the weight-weighted mean instead).
            let mut info_sum = InfoState::ZERO;
            let mut weight_sum = 0.0;
            let mut mean_num = Vec2::ZERO;
            for &id in &component {
                let p = &self.potentials[&id];
                info_sum = info_sum.fused(&p.info);
                mean_num += p.info.vec * p.weight;
                weight_sum += p.weight;
            }
            let fused_info = match self.mode {
                EngineMode::SodaCitron => info_sum,
                EngineMode::DbstreamBaseline => {
                    InfoState { vec: mean_num * (1.0 / weight_sum), mat: Mat2::IDENTITY }
                }
            };

            for &id in &component {
                if id != survivor {
                    let center = self.potentials[&id].center();
                    self.index.remove(id, center)?;
                    self.potentials.remove(&id);
                }
            }
            let p = self
                .potentials
                .get_mut(&survivor)
                .ok_or_else(|| Error::Internal(format!("survivor {survivor} missing")))?;
            let old_center = p.center();
            p.set_info(fused_info)
                .map_err(|_| Error::Internal(format!("fused state of {survivor} unrecoverable")))?;
            p.weight = weight_sum;
            let new_center = p.center();
            self.index.relocate(survivor, old_center, new_center)?;

            let deleted: BTreeSet<ObjectId> =
                component.iter().copied().filter(|&id| id != survivor).collect();
            self.density.purge(&deleted);
        }

        let mut out = Vec::new();
        for p in self.potentials.values() {
            if p.weight >= self.params.w_min {
                let (position, covariance) = p
                    .info
                    .recover()
                    .map_err(|_| Error::Internal(format!("state of {} unrecoverable", p.id)))?;
                out.push(EstimatedObject { id: p.id, position, covariance, weight: p.weight });
            }
        }
        Ok(out)
    }

    /// Serializable copy of the full engine state. Round-trips losslessly
    /// through [`Engine::from_snapshot`] (JSON float formatting included:
    /// shortest-roundtrip printing parses back bit-identically).
    pub fn snapshot(&self) -> EngineSnapshot {
        EngineSnapshot {
            mode: self.mode,
            params: self.params,
            survivor_policy: self.survivor_policy,
            id_source: self.id_source.clone(),
            potentials: self.potentials.values().cloned().collect(),
            density: self.density.clone(),
        }
    }

    /// Rebuild an engine from a snapshot, revalidating every invariant
    /// (parameter ranges, id uniqueness, id-counter consistency,
    /// recoverable states, density referencing live ids only).
    pub fn from_snapshot(s: EngineSnapshot) -> Result<Self> {
        s.params.validate()?;
        let mut engine = Engine {
            params: s.params,
            mode: s.mode,
            survivor_policy: s.survivor_policy,
            potentials: BTreeMap::new(),
            density: s.density,
            index: RadiusIndex::new(s.params.r)?,
            id_source: s.id_source,
        };
        for mut p in s.potentials {
            // Serialized objects carry (y, Y) but not the derived center.
            let info = p.info;
            p.set_info(info)
                .map_err(|_| Error::InvalidParams(format!("object {} is unrecoverable", p.id)))?;
            if p.id >= engine.id_source.issued() {
                return Err(Error::InvalidParams(format!(
                    "object id {} not below id counter {}",
                    p.id,
                    engine.id_source.issued()
                )));
            }
            if engine.potentials.contains_key(&p.id) {
                return Err(Error::InvalidParams(format!("duplicate object id {}", p.id)));
            }
            engine.index.insert(p.id, p.center())?;
            engine.potentials.insert(p.id, p);
        }
        for ((i, j), _) in engine.density.iter() {
            if !engine.potentials.contains_key(&i) || !engine.potentials.contains_key(&j) {
                return Err(Error::InvalidParams(format!(
                    "density entry ({i}, {j}) references an unknown object"
                )));
            }
        }
        Ok(engine)
    }

    /// Snapshot as a JSON string.
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.snapshot())
            .map_err(|e| Error::Internal(format!("serializing engine snapshot: {e}")))
    }

    /// Rebuild from [`Engine::to_json`] output.
    pub fn from_json(json: &str) -> Result<Self> {
        let snapshot: EngineSnapshot = serde_json::from_str(json)
            .map_err(|e| Error::InvalidParams(format!("malformed engine snapshot: {e}")))?;
        Engine::from_snapshot(snapshot)
    }
}
