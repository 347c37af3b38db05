//! Guide doc-tests.
