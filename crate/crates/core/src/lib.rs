//! Quadratic social selection functions for numerical actor covariates in stochastic
//! actor-oriented network models.
//!
//! The crate covers the whole pipeline:
//!
//! - [`network`]: directed networks, actor covariates and network panels;
//! - [`selection`]: quadratic (and legacy) selection functions and their interpretation
//!   as homophily, attachment conformity, aspiration and sociability;
//! - [`effects`]: effect statistics, evaluation function and change scores;
//! - [`sim`]: continuous-time Markov chain simulation of network evolution;
//! - [`estimation`]: method-of-moments estimation by stochastic approximation;
//! - [`inference`]: t, Wald and linear-combination tests;
//! - [`gof`]: simulation-based goodness of fit with Mahalanobis distances;
//! - [`report`]: interpretation report for a fitted selection function;
//! - [`io`], [`config`] and [`cli`]: file formats, model configuration and commands.

pub mod error;
pub mod network;
pub mod selection;
pub mod effects;
pub mod sim;
pub mod estimation;
pub mod inference;
pub mod gof;
mod linalg;
pub mod io;
pub mod config;
pub mod report;
pub mod cli;
