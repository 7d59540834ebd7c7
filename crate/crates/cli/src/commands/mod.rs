pub mod ablate;
pub mod build;
pub mod run;
