//! Command-line front end: input documents (TOML/JSON), report writing,
//! and command dispatch. All mathematics lives in `toricpot-core`; this
//! crate only parses, validates, runs, and serializes.

pub mod formats;
pub mod report;
pub mod run;
