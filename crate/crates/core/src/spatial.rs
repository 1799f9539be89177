//! Fixed-radius neighbor queries over a uniform grid hash.
//!
//! Cell size equals the query radius, so any disc of that radius is
//! covered by the 3x3 block of cells around the query point and lookups
//! cost O(1) for bounded cell occupancy. Queries with a radius larger
//! than the cell size would need a wider scan and are rejected instead;
//! the engine only ever queries at its clustering radius.

use crate::error::{Error, Result};
use crate::math::Vec2;
use crate::types::ObjectId;
use std::collections::HashMap;

/// Grid-hash index of points keyed by object id.
#[derive(Debug, Clone)]
pub struct RadiusIndex {
    cell_size: f64,
    cells: HashMap<(i64, i64), Vec<ObjectId>>,
    points: HashMap<ObjectId, Vec2>,
}

impl RadiusIndex {
    pub fn new(cell_size: f64) -> Result<Self> {
        if !(cell_size.is_finite() && cell_size > 0.0) {
            return Err(Error::InvalidParams("cell size must be finite and > 0".into()));
        }
        Ok(RadiusIndex { cell_size, cells: HashMap::new(), points: HashMap::new() })
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, id: ObjectId) -> bool {
        self.points.contains_key(&id)
    }

    /// Stored location of an id, if present.
    pub fn point_of(&self, id: ObjectId) -> Option<Vec2> {
        self.points.get(&id).copied()
    }

    fn cell_of(&self, p: Vec2) -> (i64, i64) {
        (
            (p.x / self.cell_size).floor() as i64,
            (p.y / self.cell_size).floor() as i64,
        )
    }

    /// Insert a new id. The id must not already be present.
    pub fn insert(&mut self, id: ObjectId, point: Vec2) -> Result<()> {
        if !point.is_finite() {
            return Err(Error::IndexInconsistency(format!("non-finite point for id {id}")));
        }
        if self.points.contains_key(&id) {
            return Err(Error::IndexInconsistency(format!("insert of already-present id {id}")));
        }
        self.points.insert(id, point);
        self.cells.entry(self.cell_of(point)).or_default().push(id);
        Ok(())
    }

    /// Remove an id. `point` must match the stored location exactly; a
    /// mismatch means the caller's state has drifted from the index.
    pub fn remove(&mut self, id: ObjectId, point: Vec2) -> Result<()> {
        match self.points.get(&id) {
            None => {
                return Err(Error::IndexInconsistency(format!("remove of absent id {id}")));
            }
            Some(&stored) if stored != point => {
                return Err(Error::IndexInconsistency(format!(
                    "remove of id {id} at ({}, {}) but stored at ({}, {})",
                    point.x, point.y, stored.x, stored.y
                )));
            }
            Some(_) => {}
        }
        self.points.remove(&id);
        let cell = self.cell_of(point);
        let bucket = self.cells.get_mut(&cell).ok_or_else(|| {
            Error::IndexInconsistency(format!("bucket missing for id {id}"))
        })?;
        let pos = bucket.iter().position(|&x| x == id).ok_or_else(|| {
            Error::IndexInconsistency(format!("id {id} missing from its bucket"))
        })?;
        bucket.swap_remove(pos);
        if bucket.is_empty() {
            self.cells.remove(&cell);
        }
        Ok(())
    }

    /// Move an id from its stored location to a new one.
    pub fn relocate(&mut self, id: ObjectId, old: Vec2, new: Vec2) -> Result<()> {
        self.remove(id, old)?;
        self.insert(id, new)
    }

    /// Ids strictly within `radius` of `point`, ascending. `radius` must
    /// not exceed the cell size (and must be positive).
    pub fn query_within(&self, point: Vec2, radius: f64) -> Result<Vec<ObjectId>> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParams("query radius must be finite and > 0".into()));
        }
        if radius > self.cell_size {
            return Err(Error::RadiusExceedsCellSize { radius, cell_size: self.cell_size });
        }
        let (cx, cy) = self.cell_of(point);
        let r2 = radius * radius;
        let mut out = Vec::new();
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(bucket) = self.cells.get(&(cx + dx, cy + dy)) {
                    for &id in bucket {
                        let p = self.points[&id];
                        if p.distance_squared(point) < r2 {
                            out.push(id);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        Ok(out)
    }
}
