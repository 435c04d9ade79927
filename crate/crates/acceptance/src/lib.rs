//! Holds the `acceptance` test target, which prints one PASS or FAIL line
//! per acceptance criterion. Run it with `cargo test -p ann-acceptance`.
