//! Report emission.
