//! Lane-level HD map generation from road centerlines and terrain grids,
//! lanelet conversion, and rule-based verification of the result.
//!
//! The pipeline runs in stages, each of which is usable on its own:
//!
//! - [`geodata`] loads GeoJSON centerlines, clips them to a region of interest
//!   and resolves lane count, width and direction attributes.
//! - [`terrain`] loads and mosaics ESRI ASCII elevation grids.
//! - [`mapgen`] builds the lane-level map document: nodes, segments, lanes,
//!   boundaries, groups, topology and elevation.
//! - [`laneletize`] turns the map into an explicit lanelet network.
//! - [`rules`] parses constraint rules and evaluates them over a network.
//! - [`defectlab`] injects known defects, scores reports and builds fixtures.
//! - [`workflow`] wires the stages together behind one configuration.
//!
//! Geometry and terrain kernels are generic over [`geom::Scalar`]; the
//! document types use the `f64` aliases below.

pub mod geom;
pub mod geodata;
pub mod terrain;
pub mod mapgen;
pub mod laneletize;
pub mod rules;
pub mod defectlab;
pub mod workflow;

pub type Point2 = geom::Vec2<f64>;
pub type Point3 = geom::Vec3<f64>;
pub type Dem = terrain::DemGrid<f64>;
