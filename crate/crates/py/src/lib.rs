use pyo3::prelude::*;

#[pymodule]
fn genuslab_py(_m: &Bound<'_, PyModule>) -> PyResult<()> {
    Ok(())
}
