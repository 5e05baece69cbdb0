//! Deterministic 2D indoor exploration simulator and benchmark harness.
//!
//! Simulates a LiDAR-equipped aerial robot exploring unknown indoor
//! environments under three goal-selection strategies (wavefront frontier
//! detection, weighted lightweight frontiers, and RRT-based frontier
//! discovery), with A* global planning, a dynamic-window local planner,
//! a linear battery discharge model, and a batch experiment runner that
//! aggregates six performance indicators across repeated missions.

pub mod battery;
pub mod config;
pub mod envmap;
pub mod frontiers;
pub mod geom;
pub mod kpi;
pub mod mapping;
pub mod navigation;
pub mod raycast;
pub mod runner;
pub mod sensing;
pub mod strategies;
