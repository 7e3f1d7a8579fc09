//! Seeded bucket and sign hashes, and the distance weighting function.
//!
//! Both hashes are xxHash64 evaluations of the token's UTF-8 bytes under
//! different seeds. The bucket is the hash reduced modulo the dimension; the
//! sign is the low bit of the second evaluation.

use std::fmt;

use xxhash_rust::xxh64::xxh64;

use crate::{Error, Real, Result};

/// Default sign seed offset from the bucket seed when none is given.
pub const SIGN_SEED_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;

/// Spacing of the grid that accumulation weights are snapped to (2^-24).
///
/// Every weight is an integer multiple of this quantum, so sums of weights are
/// exact in `f64` while their magnitude stays below 2^29. That makes
/// accumulation order irrelevant: streaming, batch and sharded training all
/// produce bit-identical tables.
pub const WEIGHT_QUANTUM: f64 = 1.0 / (1u64 << 24) as f64;

/// Largest accumulated magnitude for which `f64` sums of quantized weights are exact.
pub const EXACT_RANGE: f64 = (1u64 << 29) as f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignMode {
    Hashed,
    /// Every sign is +1. Test hook: turns the projection into plain bucket sums.
    Unsigned,
}

/// Parameters of the bucket hash `h` and sign hash `xi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HasherSpec {
    dimension: usize,
    seed: u64,
    sign_seed: u64,
    signs: SignMode,
}

impl HasherSpec {
    pub fn new(dimension: usize, seed: u64, sign_seed: u64) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if seed == sign_seed {
            return Err(Error::invalid(format!(
                "bucket seed and sign seed must differ (both {seed})"
            )));
        }
        Ok(Self {
            dimension,
            seed,
            sign_seed,
            signs: SignMode::Hashed,
        })
    }

    /// Spec whose sign seed is derived from `seed`.
    pub fn with_seed(dimension: usize, seed: u64) -> Result<Self> {
        Self::new(dimension, seed, seed.wrapping_add(SIGN_SEED_OFFSET))
    }

    /// Same spec with every sign forced to +1.
    pub fn unsigned(mut self) -> Self {
        self.signs = SignMode::Unsigned;
        self
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sign_seed(&self) -> u64 {
        self.sign_seed
    }

    pub fn sign_mode(&self) -> SignMode {
        self.signs
    }

    /// Bucket `h(token)` in `[0, dimension)`.
    pub fn index(&self, token: &str) -> usize {
        (xxh64(token.as_bytes(), self.seed) % self.dimension as u64) as usize
    }

    /// Sign `xi(token)`: +1 or -1.
    pub fn sign(&self, token: &str) -> i8 {
        match self.signs {
            SignMode::Unsigned => 1,
            SignMode::Hashed => {
                if xxh64(token.as_bytes(), self.sign_seed) & 1 == 1 {
                    1
                } else {
                    -1
                }
            }
        }
    }
}

fn non_empty(token: &str) -> Result<&str> {
    if token.is_empty() {
        Err(Error::invalid("cannot hash an empty token"))
    } else {
        Ok(token)
    }
}

pub fn index_hash(token: &str, spec: &HasherSpec) -> Result<usize> {
    Ok(spec.index(non_empty(token)?))
}

pub fn sign_hash(token: &str, spec: &HasherSpec) -> Result<i8> {
    Ok(spec.sign(non_empty(token)?))
}

/// Distance weighting `f(d)` applied to each co-occurrence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightSpec {
    /// `f(d) = 1`: plain co-occurrence counts.
    Constant,
    /// `f(d) = exp(-(d / sigma)^2)`.
    Gaussian { sigma: f64 },
}

impl WeightSpec {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::invalid(format!("sigma {sigma} must be positive")));
        }
        Ok(WeightSpec::Gaussian { sigma })
    }

    /// Gaussian with `sigma = window / 2`, so the window edge weighs `e^-4`.
    pub fn default_for_window(window: usize) -> Self {
        WeightSpec::Gaussian {
            sigma: window.max(1) as f64 / 2.0,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            WeightSpec::Constant => "constant",
            WeightSpec::Gaussian { .. } => "gaussian",
        }
    }

    pub fn sigma(&self) -> Option<f64> {
        match *self {
            WeightSpec::Constant => None,
            WeightSpec::Gaussian { sigma } => Some(sigma),
        }
    }

    /// Closed-form weight for distance `d >= 1`.
    pub fn weight(&self, distance: usize) -> Result<f64> {
        if distance < 1 {
            return Err(Error::invalid("distance must be at least 1"));
        }
        Ok(self.eval(distance))
    }

    fn eval(&self, distance: usize) -> f64 {
        match *self {
            WeightSpec::Constant => 1.0,
            WeightSpec::Gaussian { sigma } => {
                let x = distance as f64 / sigma;
                (-x * x).exp()
            }
        }
    }

    /// Weight actually accumulated during training: `f(d)` rounded to the
    /// nearest multiple of [`WEIGHT_QUANTUM`], never below one quantum.
    pub fn quantized(&self, distance: usize) -> Result<f64> {
        let w = self.weight(distance)?;
        let units = (w / WEIGHT_QUANTUM).round().max(1.0);
        Ok(units * WEIGHT_QUANTUM)
    }

    /// Quantized weights for distances `1..=window`, as scalars; index `d - 1`.
    pub fn table<T: Real>(&self, window: usize) -> Vec<T> {
        (1..=window)
            .map(|d| T::from_f64_lossy(self.quantized(d).expect("d >= 1")))
            .collect()
    }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSpec::Constant => f.write_str("constant"),
            WeightSpec::Gaussian { sigma } => write!(f, "gaussian(sigma={sigma})"),
        }
    }
}

/// Free-function form of [`WeightSpec::weight`].
pub fn weight(distance: usize, spec: &WeightSpec) -> Result<f64> {
    spec.weight(distance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn xxh64_reference_vectors() {
        // published XXH64 values, cross-checked with the reference C library
        assert_eq!(xxh64(b"", 0), 0xef46_db37_51d8_e999);
        assert_eq!(xxh64(b"a", 0), 0xd24e_c4f1_a98c_6e5b);
        assert_eq!(xxh64(b"abc", 0), 0x44bc_2cf5_ad77_0999);
        assert_eq!(
            xxh64(b"Nobody inspects the spammish repetition", 0),
            0xfbce_a83c_8a37_8bf1
        );
        assert_eq!(xxh64(b"hash2vec", 42), 0xfd1d_28cc_2009_574a);
    }

    #[test]
    fn index_examples() {
        let one = HasherSpec::new(1, 99, 100).unwrap();
        assert_eq!(index_hash("anything", &one).unwrap(), 0);
        let spec = HasherSpec::new(1000, 1, 2).unwrap();
        assert_eq!(index_hash("word", &spec).unwrap(), index_hash("word", &spec).unwrap());
        assert_eq!(
            index_hash("abc", &HasherSpec::new(1 << 20, 0, 1).unwrap()).unwrap(),
            0x70999
        );
        assert!(index_hash("", &spec).is_err());
        assert!(sign_hash("", &spec).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(HasherSpec::new(0, 1, 2).is_err());
        assert!(HasherSpec::new(8, 3, 3).is_err());
        assert!(HasherSpec::with_seed(8, 3).is_ok());
    }

    #[test]
    fn bucket_load_is_balanced() {
        let spec = HasherSpec::new(256, 17, 18).unwrap();
        let mut load = [0usize; 256];
        for i in 0..10_000 {
            load[spec.index(&format!("token{i}"))] += 1;
        }
        let mean = 10_000.0 / 256.0;
        let max = *load.iter().max().unwrap() as f64;
        assert!(max < 4.0 * mean, "max load {max}");
    }

    #[test]
    fn signs_are_balanced() {
        let spec = HasherSpec::new(64, 5, 6).unwrap();
        let plus = (0..10_000).filter(|i| spec.sign(&format!("w{i}")) == 1).count();
        let frac = plus as f64 / 10_000.0;
        assert!((0.45..=0.55).contains(&frac), "fraction {frac}");
    }

    #[test]
    fn unsigned_hook() {
        let spec = HasherSpec::new(64, 5, 6).unwrap().unsigned();
        assert!((0..100).all(|i| spec.sign(&format!("w{i}")) == 1));
    }

    #[test]
    fn seed_changes_assignment() {
        let a = HasherSpec::new(512, 1, 2).unwrap();
        let b = HasherSpec::new(512, 3, 2).unwrap();
        let tokens: Vec<String> = (0..1000).map(|i| format!("t{i}")).collect();
        assert!(tokens.iter().any(|t| a.index(t) != b.index(t)));
    }

    #[test]
    fn weight_examples() {
        assert_eq!(weight(1, &WeightSpec::Constant).unwrap(), 1.0);
        assert_eq!(weight(37, &WeightSpec::Constant).unwrap(), 1.0);
        let g = WeightSpec::gaussian(2.0).unwrap();
        assert!((weight(2, &g).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert!((weight(2, &g).unwrap() - 0.367879).abs() < 5e-7);
        assert!(weight(0, &g).is_err());
        assert!(WeightSpec::gaussian(0.0).is_err());
        assert!(WeightSpec::gaussian(-1.0).is_err());
        assert_eq!(WeightSpec::default_for_window(10), WeightSpec::Gaussian { sigma: 5.0 });
    }

    #[test]
    fn quantized_weights_sit_on_grid() {
        let g = WeightSpec::gaussian(1.3).unwrap();
        for d in 1..40 {
            let q = g.quantized(d).unwrap();
            assert!(q > 0.0);
            assert_eq!((q / WEIGHT_QUANTUM).fract(), 0.0);
            assert!((q - g.weight(d).unwrap()).abs() <= WEIGHT_QUANTUM);
        }
        assert_eq!(WeightSpec::Constant.quantized(3).unwrap(), 1.0);
    }

    proptest! {
        #[test]
        fn index_in_range(token in "\\PC{1,12}", n in 1usize..5000, seed in any::<u64>()) {
            let spec = HasherSpec::with_seed(n, seed).unwrap();
            prop_assert!(spec.index(&token) < n);
            prop_assert!(matches!(spec.sign(&token), 1 | -1));
        }

        #[test]
        fn gaussian_decreasing(sigma in 1.0f64..50.0, d in 1usize..20) {
            let g = WeightSpec::gaussian(sigma).unwrap();
            let (a, b) = (g.weight(d).unwrap(), g.weight(d + 1).unwrap());
            prop_assert!(a > 0.0 && a < 1.0);
            prop_assert!(b < a);
        }
    }
}
