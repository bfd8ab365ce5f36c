//! Python bindings for `moiredb`.
//!
//! Images cross the boundary as `bytes` (8-bit, row-major, RGB interleaved)
//! or as `UnitImage` objects for the real-valued mixing space.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use moiredb::dataset::{self, cifar, mixing_set};
use moiredb::{moire, pixmix, rng, Error};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } | Error::MissingManifest(_) => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

#[pyclass(name = "ConcentricPatternSpec", module = "moiredb_py", from_py_object)]
#[derive(Clone)]
pub struct PyPatternSpec(moire::ConcentricPatternSpec);

#[pymethods]
impl PyPatternSpec {
    #[new]
    #[pyo3(signature = (nu, center_x, center_y, amplitude = 1.0))]
    fn new(nu: f64, center_x: f64, center_y: f64, amplitude: f64) -> PyResult<Self> {
        moire::ConcentricPatternSpec::new(nu, center_x, center_y, amplitude)
            .map(Self)
            .map_err(to_py)
    }

    #[getter]
    fn nu(&self) -> f64 {
        self.0.nu
    }

    #[getter]
    fn center_x(&self) -> f64 {
        self.0.center_x
    }

    #[getter]
    fn center_y(&self) -> f64 {
        self.0.center_y
    }

    #[getter]
    fn amplitude(&self) -> f64 {
        self.0.amplitude
    }

    fn __repr__(&self) -> String {
        format!(
            "ConcentricPatternSpec(nu={}, center_x={}, center_y={}, amplitude={})",
            self.0.nu, self.0.center_x, self.0.center_y, self.0.amplitude
        )
    }
}

#[pyclass(name = "MoireImageSpec", module = "moiredb_py", from_py_object)]
#[derive(Clone)]
pub struct PyImageSpec(moire::MoireImageSpec);

#[pymethods]
impl PyImageSpec {
    #[new]
    #[pyo3(signature = (patterns, width = 512, height = 512, image_seed = 0))]
    fn new(
        patterns: Vec<PyPatternSpec>,
        width: usize,
        height: usize,
        image_seed: u64,
    ) -> PyResult<Self> {
        let patterns = patterns.into_iter().map(|p| p.0).collect();
        moire::MoireImageSpec::new(patterns, width, height, image_seed)
            .map(Self)
            .map_err(to_py)
    }

    #[getter]
    fn q_n(&self) -> u32 {
        self.0.q_n
    }

    #[getter]
    fn patterns(&self) -> Vec<PyPatternSpec> {
        self.0.patterns.iter().copied().map(PyPatternSpec).collect()
    }

    #[getter]
    fn width(&self) -> usize {
        self.0.width
    }

    #[getter]
    fn height(&self) -> usize {
        self.0.height
    }

    #[getter]
    fn image_seed(&self) -> u64 {
        self.0.image_seed
    }

    fn __repr__(&self) -> String {
        format!(
            "MoireImageSpec(q_n={}, {}x{}, image_seed={})",
            self.0.q_n, self.0.width, self.0.height, self.0.image_seed
        )
    }
}

#[pyclass(name = "ParamRanges", module = "moiredb_py", from_py_object)]
#[derive(Clone)]
pub struct PyParamRanges(moire::ParamRanges);

#[pymethods]
impl PyParamRanges {
    #[new]
    #[pyo3(signature = (
        nu_min = moire::DEFAULT_NU_MIN,
        nu_max = moire::DEFAULT_NU_MAX,
        center_min = moire::DEFAULT_CENTER_MIN,
        center_max = moire::DEFAULT_CENTER_MAX,
        q_n_choices = moire::DEFAULT_QN_CHOICES.to_vec(),
        amplitude = moire::DEFAULT_AMPLITUDE,
    ))]
    fn new(
        nu_min: f64,
        nu_max: f64,
        center_min: f64,
        center_max: f64,
        q_n_choices: Vec<u32>,
        amplitude: f64,
    ) -> PyResult<Self> {
        let r = moire::ParamRanges {
            nu_min,
            nu_max,
            center_min,
            center_max,
            q_n_choices,
            amplitude,
        };
        r.validate().map_err(to_py)?;
        Ok(Self(r))
    }

    #[getter]
    fn nu_min(&self) -> f64 {
        self.0.nu_min
    }

    #[getter]
    fn nu_max(&self) -> f64 {
        self.0.nu_max
    }

    #[getter]
    fn center_min(&self) -> f64 {
        self.0.center_min
    }

    #[getter]
    fn center_max(&self) -> f64 {
        self.0.center_max
    }

    #[getter]
    fn q_n_choices(&self) -> Vec<u32> {
        self.0.q_n_choices.clone()
    }

    #[getter]
    fn amplitude(&self) -> f64 {
        self.0.amplitude
    }
}

#[pyclass(name = "MixConfig", module = "moiredb_py", from_py_object)]
#[derive(Clone)]
pub struct PyMixConfig(pixmix::MixConfig);

#[pymethods]
impl PyMixConfig {
    #[new]
    #[pyo3(signature = (k_max = 5, beta_shape = 3.0, p_mixer_from_set = 0.5, p_additive = 0.5, epsilon = 1e-3))]
    fn new(
        k_max: u32,
        beta_shape: f64,
        p_mixer_from_set: f64,
        p_additive: f64,
        epsilon: f64,
    ) -> PyResult<Self> {
        let c = pixmix::MixConfig {
            k_max,
            beta_shape,
            p_mixer_from_set,
            p_additive,
            epsilon,
        };
        c.validate().map_err(to_py)?;
        Ok(Self(c))
    }

    #[getter]
    fn k_max(&self) -> u32 {
        self.0.k_max
    }

    #[getter]
    fn beta_shape(&self) -> f64 {
        self.0.beta_shape
    }

    #[getter]
    fn p_mixer_from_set(&self) -> f64 {
        self.0.p_mixer_from_set
    }

    #[getter]
    fn p_additive(&self) -> f64 {
        self.0.p_additive
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.0.epsilon
    }
}

/// The xoshiro256++ stream every draw in the pipeline uses.
#[pyclass(name = "Rng", module = "moiredb_py")]
pub struct PyRng(rng::Xoshiro256PlusPlus);

#[pymethods]
impl PyRng {
    #[new]
    fn new(seed: u64) -> Self {
        Self(rng::Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn next_f64(&mut self) -> f64 {
        self.0.next_f64()
    }

    fn uniform(&mut self, low: f64, high: f64) -> PyResult<f64> {
        if low.is_nan() || high.is_nan() || low >= high {
            return Err(PyValueError::new_err("need low < high"));
        }
        Ok(self.0.uniform(low, high))
    }

    fn below(&mut self, n: u64) -> PyResult<u64> {
        if n == 0 {
            return Err(PyValueError::new_err("n must be positive"));
        }
        Ok(self.0.below(n))
    }

    fn beta(&mut self, alpha: f64, beta: f64) -> PyResult<f64> {
        if !(alpha > 0.0 && beta > 0.0) {
            return Err(PyValueError::new_err("shape parameters must be positive"));
        }
        Ok(self.0.beta(alpha, beta))
    }

    fn sample_coefficients(&mut self, beta_shape: f64) -> PyResult<(f64, f64)> {
        if beta_shape.is_nan() || beta_shape <= 0.0 {
            return Err(PyValueError::new_err("beta_shape must be positive"));
        }
        Ok(pixmix::sample_coefficients(&mut self.0, beta_shape))
    }

    fn sample_spec(
        &mut self,
        ranges: &PyParamRanges,
        width: usize,
        height: usize,
        image_seed: u64,
    ) -> PyImageSpec {
        PyImageSpec(moire::sample_spec(
            &mut self.0,
            &ranges.0,
            width,
            height,
            image_seed,
        ))
    }
}

#[pyclass(name = "UnitImage", module = "moiredb_py", from_py_object)]
#[derive(Clone)]
pub struct PyUnitImage(moiredb::UnitImage);

#[pymethods]
impl PyUnitImage {
    #[new]
    fn new(width: usize, height: usize, channels: usize, values: Vec<f64>) -> PyResult<Self> {
        moiredb::UnitImage::new(width, height, channels, values)
            .map(Self)
            .map_err(to_py)
    }

    #[staticmethod]
    fn from_rgb_bytes(width: usize, height: usize, data: Vec<u8>) -> PyResult<Self> {
        let img = moiredb::RgbImage::new(width, height, data).map_err(to_py)?;
        Ok(Self(moiredb::UnitImage::from_rgb(&img)))
    }

    #[staticmethod]
    fn from_gray_bytes(width: usize, height: usize, data: Vec<u8>) -> PyResult<Self> {
        let img = moiredb::GrayImage::new(width, height, data).map_err(to_py)?;
        Ok(Self(moiredb::UnitImage::from_gray(&img)))
    }

    #[getter]
    fn width(&self) -> usize {
        self.0.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.0.height()
    }

    #[getter]
    fn channels(&self) -> usize {
        self.0.channels()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.0.values().to_vec()
    }

    /// Quantized RGB bytes (gray images are replicated).
    fn to_rgb_bytes(&self) -> Vec<u8> {
        self.0.to_rgb().pixels().to_vec()
    }
}

#[pyfunction]
fn radial_brightness(r: f64, nu: f64, amplitude: f64) -> f64 {
    moire::radial_brightness(r, nu, amplitude)
}

#[pyfunction]
fn render_pattern(spec: &PyPatternSpec, width: usize, height: usize) -> PyResult<Vec<u8>> {
    if width == 0 || height == 0 {
        return Err(PyValueError::new_err("image dimensions must be positive"));
    }
    Ok(moire::render_pattern(&spec.0, width, height).into_pixels())
}

#[pyfunction]
fn superpose(images: Vec<Vec<u8>>, width: usize, height: usize) -> PyResult<Vec<u8>> {
    let images = images
        .into_iter()
        .map(|px| moiredb::GrayImage::new(width, height, px))
        .collect::<Result<Vec<_>, _>>()
        .map_err(to_py)?;
    moire::superpose(&images)
        .map(|img| img.into_pixels())
        .map_err(to_py)
}

#[pyfunction]
fn generate_moire(spec: &PyImageSpec) -> Vec<u8> {
    moire::generate_moire(&spec.0).into_pixels()
}

#[pyfunction]
fn fringe_count(spec: &PyPatternSpec, width: usize, height: usize) -> u32 {
    moire::fringe_count(&spec.0, width, height)
}

/// Spec for `image_seed`, drawn from a fresh stream seeded with it.
#[pyfunction]
#[pyo3(signature = (image_seed, ranges = None, width = 512, height = 512))]
fn spec_from_seed(
    image_seed: u64,
    ranges: Option<PyParamRanges>,
    width: usize,
    height: usize,
) -> PyImageSpec {
    let ranges = ranges.map(|r| r.0).unwrap_or_default();
    PyImageSpec(moire::MoireImageSpec::from_seed(
        &ranges, width, height, image_seed,
    ))
}

#[pyfunction]
fn derive_seed(master_seed: u64, index: u64) -> u64 {
    rng::derive_seed(master_seed, index)
}

#[pyfunction]
fn fnv1a64(data: Vec<u8>) -> u64 {
    dataset::fnv1a64(&data)
}

#[pyfunction]
fn mix_additive(base: &PyUnitImage, mixer: &PyUnitImage, a: f64, b: f64) -> PyResult<PyUnitImage> {
    pixmix::mix_additive(&base.0, &mixer.0, a, b)
        .map(PyUnitImage)
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (base, mixer, a, b, epsilon = 1e-3))]
fn mix_multiplicative(
    base: &PyUnitImage,
    mixer: &PyUnitImage,
    a: f64,
    b: f64,
    epsilon: f64,
) -> PyResult<PyUnitImage> {
    pixmix::mix_multiplicative(&base.0, &mixer.0, a, b, epsilon)
        .map(PyUnitImage)
        .map_err(to_py)
}

/// Runs the mixing pipeline with the stream `xoshiro256++(seed)`.
/// Returns the mixed image and the number of steps applied.
#[pyfunction]
#[pyo3(signature = (input, train, mixing_set, seed, config = None))]
fn pixmix_augment(
    input: &PyUnitImage,
    train: Vec<PyUnitImage>,
    mixing_set: Vec<PyUnitImage>,
    seed: u64,
    config: Option<PyMixConfig>,
) -> PyResult<(PyUnitImage, usize)> {
    let train: Vec<_> = train.into_iter().map(|i| i.0).collect();
    let mixing: Vec<_> = mixing_set.into_iter().map(|i| i.0).collect();
    let config = config.map(|c| c.0).unwrap_or_default();
    let mut r = rng::Xoshiro256PlusPlus::seed_from_u64(seed);
    let (img, steps) =
        pixmix::pixmix_augment_traced(&input.0, &train, &mixing, &mut r, &config).map_err(to_py)?;
    Ok((PyUnitImage(img), steps.len()))
}

/// Generates a mixing set; returns `(count, dataset_hash_hex)`.
#[pyfunction]
#[pyo3(signature = (out_dir, master_seed = 0, count = dataset::DEFAULT_COUNT, size = moire::DEFAULT_SIZE, ranges = None))]
fn build_mixing_set(
    py: Python<'_>,
    out_dir: PathBuf,
    master_seed: u64,
    count: usize,
    size: usize,
    ranges: Option<PyParamRanges>,
) -> PyResult<(usize, String)> {
    let params = mixing_set::MixingSetParams {
        master_seed,
        count,
        ranges: ranges.map(|r| r.0).unwrap_or_default(),
        width: size,
        height: size,
    };
    let manifest = py
        .detach(|| dataset::build_mixing_set(&params, &out_dir))
        .map_err(to_py)?;
    Ok((
        manifest.count,
        dataset::format_hash(manifest.dataset_hash()),
    ))
}

/// Loads and hash-checks a mixing set; returns `(width, height, [bytes])`.
#[pyfunction]
fn load_mixing_set(py: Python<'_>, dir: PathBuf) -> PyResult<(usize, usize, Vec<Vec<u8>>)> {
    let set = py
        .detach(|| dataset::load_mixing_set(&dir))
        .map_err(to_py)?;
    let m = set.manifest();
    let images = set.images().iter().map(|i| i.pixels().to_vec()).collect();
    Ok((m.width, m.height, images))
}

/// Returns `[(index, reason)]` for every entry that fails regeneration.
#[pyfunction]
fn verify_mixing_set(py: Python<'_>, dir: PathBuf) -> PyResult<Vec<(usize, String)>> {
    let (_, failures) = py
        .detach(|| dataset::verify_mixing_set(&dir))
        .map_err(to_py)?;
    Ok(failures.into_iter().map(|f| (f.index, f.reason)).collect())
}

/// Reads a CIFAR binary batch as `[(rgb_bytes, label)]` of 32x32 images.
#[pyfunction]
fn read_cifar_batch(path: PathBuf, class_count: u16) -> PyResult<Vec<(Vec<u8>, u16)>> {
    let records = cifar::read_cifar_batch(&path, class_count).map_err(to_py)?;
    Ok(records
        .into_iter()
        .map(|r| (r.image.pixels().to_vec(), r.label))
        .collect())
}

#[pymodule]
fn moiredb_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("DEFAULT_COUNT", dataset::DEFAULT_COUNT)?;
    m.add("DEFAULT_SIZE", moire::DEFAULT_SIZE)?;
    m.add_class::<PyPatternSpec>()?;
    m.add_class::<PyImageSpec>()?;
    m.add_class::<PyParamRanges>()?;
    m.add_class::<PyMixConfig>()?;
    m.add_class::<PyRng>()?;
    m.add_class::<PyUnitImage>()?;
    m.add_function(wrap_pyfunction!(radial_brightness, m)?)?;
    m.add_function(wrap_pyfunction!(render_pattern, m)?)?;
    m.add_function(wrap_pyfunction!(superpose, m)?)?;
    m.add_function(wrap_pyfunction!(generate_moire, m)?)?;
    m.add_function(wrap_pyfunction!(fringe_count, m)?)?;
    m.add_function(wrap_pyfunction!(spec_from_seed, m)?)?;
    m.add_function(wrap_pyfunction!(derive_seed, m)?)?;
    m.add_function(wrap_pyfunction!(fnv1a64, m)?)?;
    m.add_function(wrap_pyfunction!(mix_additive, m)?)?;
    m.add_function(wrap_pyfunction!(mix_multiplicative, m)?)?;
    m.add_function(wrap_pyfunction!(pixmix_augment, m)?)?;
    m.add_function(wrap_pyfunction!(build_mixing_set, m)?)?;
    m.add_function(wrap_pyfunction!(load_mixing_set, m)?)?;
    m.add_function(wrap_pyfunction!(verify_mixing_set, m)?)?;
    m.add_function(wrap_pyfunction!(read_cifar_batch, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_functions_match_core() {
        assert_eq!(radial_brightness(0.0, 0.02, 1.0), 255.0);
        assert_eq!(derive_seed(1, 2), rng::derive_seed(1, 2));
        assert_eq!(fnv1a64(b"a".to_vec()), 0xaf63dc4c8601ec8c);
        let spec = PyPatternSpec::new(0.02, 4.0, 4.0, 1.0).unwrap();
        let layer = render_pattern(&spec, 8, 8).unwrap();
        assert_eq!(
            superpose(vec![layer.clone(), layer.clone()], 8, 8).unwrap(),
            layer
        );
        assert_eq!(fringe_count(&spec, 8, 8), 1);
    }

    #[test]
    fn seeded_spec_matches_rng_path() {
        let ranges = PyParamRanges(moire::ParamRanges::default());
        let direct = spec_from_seed(9, Some(ranges.clone()), 16, 16);
        let mut r = PyRng::new(9);
        let via_rng = r.sample_spec(&ranges, 16, 16, 9);
        assert_eq!(direct.0, via_rng.0);
        assert_eq!(generate_moire(&direct).len(), 256);
    }
}
