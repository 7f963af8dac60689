use pyo3::prelude::*;

#[pymodule]
fn values_miner_py(_m: &Bound<'_, PyModule>) -> PyResult<()> { Ok(()) }
