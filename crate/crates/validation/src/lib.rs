//! Holds the `acceptance` test target, which checks the numbered acceptance
//! criteria against freshly computed data. See `tests/acceptance.rs`.
