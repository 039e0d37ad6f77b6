//! Command-line driver: configuration, staged outputs and run manifests
//! around the `lbd_core` pipelines.

pub mod app;
pub mod config;
pub mod manifest;
pub mod pipelines;
