//! Holds the `acceptance` test target, which runs the full scenarios end to
//! end and prints one PASS/FAIL line per criterion. It lives in its own
//! package so `cargo test --workspace` runs it after the unit and
//! integration tests of the other crates.
