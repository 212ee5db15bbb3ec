//! Holds the workspace acceptance suite (`cargo test -p tohm-verify`); the
//! checks themselves are in `tests/acceptance.rs`.
