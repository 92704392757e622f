//! Python bindings: the dictionary/table pipeline plus the Grover-variant
//! probability helpers, mirroring the CLI surface.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use qrainbow::buckets::BucketMap;
use qrainbow::dictgen::SmartDictionary;
use qrainbow::grover;
use qrainbow::qsim::NoiseModel;
use qrainbow::rainbow::{self, EngineKind, HashValue, RainbowTable, TableParams};

fn err(e: qrainbow::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A validated smart dictionary.
#[pyclass(frozen)]
struct Dictionary {
    inner: SmartDictionary,
}

#[pymethods]
impl Dictionary {
    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        let inner = SmartDictionary::from_file(std::path::Path::new(path)).map_err(err)?;
        Ok(Dictionary { inner })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        let inner = SmartDictionary::parse(text).map_err(err)?;
        Ok(Dictionary { inner })
    }

    /// N, the number of addressable plaintexts.
    fn space_size(&self) -> u64 {
        self.inner.space_size()
    }

    fn index_to_plain(&self, i: u64) -> PyResult<String> {
        self.inner.index_to_plain(i).map_err(err)
    }

    fn pattern(&self) -> String {
        self.inner.pattern().to_string()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dictionary(pattern={}, N={})",
            self.inner.pattern(),
            self.inner.space_size()
        )
    }
}

/// A rainbow table with its bucket index, ready to crack hashes.
#[pyclass]
struct Table {
    table: RainbowTable,
    buckets: BucketMap,
}

#[pymethods]
impl Table {
    #[staticmethod]
    #[pyo3(signature = (dictionary, t=16, m=64, k=16, kappa=16, seed=1, hash="sha1"))]
    fn generate(
        dictionary: PyRef<'_, Dictionary>,
        t: u64,
        m: u64,
        k: u64,
        kappa: u32,
        seed: u64,
        hash: &str,
    ) -> PyResult<Self> {
        let params = TableParams {
            chain_length: t,
            chain_count: m,
            hash_algorithm: hash.parse().map_err(err)?,
            bucket_modulus: k,
            endpoint_bits: kappa,
            seed,
            dictionary: dictionary.inner.clone(),
        };
        let table = rainbow::generate_table(params).map_err(err)?;
        let buckets = BucketMap::build(&table).map_err(err)?;
        Ok(Table { table, buckets })
    }

    #[staticmethod]
    fn load(path: &str, dictionary: PyRef<'_, Dictionary>) -> PyResult<Self> {
        let table = RainbowTable::load(std::path::Path::new(path), dictionary.inner.clone())
            .map_err(err)?;
        let buckets = BucketMap::build(&table).map_err(err)?;
        Ok(Table { table, buckets })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.table.save(std::path::Path::new(path)).map_err(err)
    }

    fn save_buckets(&self, path: &str) -> PyResult<()> {
        self.buckets.save(std::path::Path::new(path)).map_err(err)
    }

    fn rows(&self) -> usize {
        self.table.rows().len()
    }

    fn generation_hash_evals(&self) -> u64 {
        self.table.generation_hash_evals()
    }

    /// Recover a preimage of the hex-encoded digest, or None.
    #[pyo3(signature = (target_hex, engine="dega"))]
    fn crack(&self, target_hex: &str, engine: &str) -> PyResult<Option<String>> {
        let engine: EngineKind = engine.parse().map_err(err)?;
        let target = HashValue::from_hex(target_hex).map_err(err)?;
        let outcome = rainbow::search(&target, &self.table, &self.buckets, engine).map_err(err)?;
        Ok(outcome.result)
    }

    /// Like crack, but also returns the cost counters as a dict.
    #[pyo3(signature = (target_hex, engine="dega"))]
    fn crack_with_counters<'py>(
        &self,
        py: Python<'py>,
        target_hex: &str,
        engine: &str,
    ) -> PyResult<(Option<String>, Bound<'py, pyo3::types::PyDict>)> {
        use pyo3::types::PyDict;
        let engine: EngineKind = engine.parse().map_err(err)?;
        let target = HashValue::from_hex(target_hex).map_err(err)?;
        let outcome = rainbow::search(&target, &self.table, &self.buckets, engine).map_err(err)?;
        let c = outcome.counters;
        let dict = PyDict::new(py);
        dict.set_item("replay_hash_evals", c.replay_hash_evals)?;
        dict.set_item("final_column_hash_evals", c.final_column_hash_evals)?;
        dict.set_item("rebuild_hash_evals", c.rebuild_hash_evals)?;
        dict.set_item("oracle_calls", c.oracle_calls)?;
        dict.set_item("chains_examined", c.chains_examined)?;
        Ok((outcome.result, dict))
    }

    fn __repr__(&self) -> String {
        let p = self.table.params();
        format!(
            "Table(m={}, t={}, k={}, kappa={})",
            p.chain_count, p.chain_length, p.bucket_modulus, p.endpoint_bits
        )
    }
}

/// Phase angle of the 3-qubit exact stage.
#[pyfunction]
fn compute_phi() -> f64 {
    grover::compute_phi()
}

/// P(tau) for a variant ("original", "modified", "dega"); `p` switches to
/// the depolarizing density-matrix path.
#[pyfunction]
#[pyo3(signature = (variant, tau, p=None))]
fn success_probability(variant: &str, tau: &str, p: Option<f64>) -> PyResult<f64> {
    let variant: grover::Variant = variant.parse().map_err(err)?;
    let spec = grover::TargetSpec::new(tau).map_err(err)?;
    let noise = p.map(NoiseModel::new).transpose().map_err(err)?;
    grover::success_probability(variant, &spec, noise).map_err(err)
}

/// DEGA's segment plan for tau: list of (start, width, tau_local).
#[pyfunction]
fn partition(tau: &str) -> PyResult<Vec<(usize, usize, String)>> {
    let spec = grover::TargetSpec::new(tau).map_err(err)?;
    Ok(grover::partition(&spec)
        .segments
        .into_iter()
        .map(|s| (s.start, s.width, s.tau_local))
        .collect())
}

/// Hex digest of a plaintext under "sha1" or "sha256".
#[pyfunction]
fn hash_hex(algorithm: &str, plaintext: &str) -> PyResult<String> {
    let alg: rainbow::HashAlgorithm = algorithm.parse().map_err(err)?;
    Ok(rainbow::full_hash(alg, plaintext).to_hex())
}

#[pymodule]
fn qrainbow_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Dictionary>()?;
    m.add_class::<Table>()?;
    m.add_function(wrap_pyfunction!(compute_phi, m)?)?;
    m.add_function(wrap_pyfunction!(success_probability, m)?)?;
    m.add_function(wrap_pyfunction!(partition, m)?)?;
    m.add_function(wrap_pyfunction!(hash_hex, m)?)?;
    Ok(())
}
