//! Frequency lattices arising from Hamiltonian data encodings.
//!
//! Each data component `x_j` is encoded through gates `exp(-i H x_j)`, which
//! contributes a one-dimensional, mirror-symmetric frequency set. The full
//! frequency set is the Cartesian product of the per-axis sets, so a frequency
//! is addressed by a [`MultiIndex`] of signed offsets `k_j ∈ [-M_j, M_j]`
//! measured from the zero frequency of each axis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance under which two computed frequencies are merged.
pub const DEDUP_TOL: f64 = 1e-12;

/// Mirror-symmetric, strictly increasing list of frequencies along one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyAxis {
    values: Vec<f64>,
}

impl FrequencyAxis {
    /// Validates `values`: odd length, strictly increasing, zero at the
    /// center and `values[c - k] == -values[c + k]` to within [`DEDUP_TOL`].
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len().is_multiple_of(2) {
            return Err(Error::InvalidAxis(format!(
                "length {} is not odd",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("axis value {v}")));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidAxis("values not strictly increasing".into()));
        }
        let m = values.len() / 2;
        if values[m] != 0.0 {
            return Err(Error::InvalidAxis(format!(
                "center value {} is not zero",
                values[m]
            )));
        }
        for k in 1..=m {
            if (values[m - k] + values[m + k]).abs() > DEDUP_TOL {
                return Err(Error::InvalidAxis(format!(
                    "offset {k} is not mirrored: {} vs {}",
                    values[m - k],
                    values[m + k]
                )));
            }
        }
        Ok(Self { values })
    }

    /// Integer frequencies `-m, ..., m`.
    pub fn integer(m: usize) -> Self {
        let m = m as i64;
        Self {
            values: (-m..=m).map(|k| k as f64).collect(),
        }
    }

    /// Frequencies generated by a sequence of encoding gates with the given
    /// eigenvalue spectra.
    ///
    /// A single gate with spectrum `λ` contributes the difference set
    /// `{λ_a - λ_b}`; successive gates combine by Minkowski sum. The result
    /// is sorted, deduplicated to [`DEDUP_TOL`], and rebuilt from its
    /// positive half so that the mirror symmetry is exact.
    pub fn from_spectra(spectra: &[Vec<f64>]) -> Result<Self> {
        if spectra.is_empty() {
            return Err(Error::EmptySpectra);
        }
        let mut acc = vec![0.0];
        for spectrum in spectra {
            if spectrum.is_empty() {
                return Err(Error::InvalidArgument("gate spectrum is empty".into()));
            }
            if let Some(v) = spectrum.iter().find(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("eigenvalue {v}")));
            }
            let diffs: Vec<f64> = spectrum
                .iter()
                .flat_map(|a| spectrum.iter().map(move |b| a - b))
                .collect();
            let mut next = Vec::with_capacity(acc.len() * diffs.len());
            for a in &acc {
                for d in &diffs {
                    next.push(a + d);
                }
            }
            acc = dedup_sorted(next);
        }
        let positive: Vec<f64> = acc.into_iter().filter(|&v| v > DEDUP_TOL).collect();
        let mut values: Vec<f64> = positive.iter().rev().map(|v| -v).collect();
        values.push(0.0);
        values.extend(positive);
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `M` such that the axis holds `2M + 1` frequencies.
    pub fn m(&self) -> usize {
        self.values.len() / 2
    }

    /// Number of frequencies, `2M + 1`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Frequency at signed offset `k` from the center.
    pub fn value(&self, k: i64) -> Option<f64> {
        let pos = k + self.m() as i64;
        (pos >= 0 && (pos as usize) < self.values.len()).then(|| self.values[pos as usize])
    }

    /// True when every frequency is an integer.
    pub fn is_integer(&self) -> bool {
        self.values.iter().all(|v| v.fract() == 0.0)
    }
}

fn dedup_sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.total_cmp(b));
    let mut out: Vec<f64> = Vec::with_capacity(v.len());
    for x in v {
        match out.last() {
            Some(&last) if (x - last).abs() <= DEDUP_TOL => {}
            _ => out.push(x),
        }
    }
    out
}

/// `axis_from_spectra`, as a free function.
pub fn axis_from_spectra(eigenvalue_lists: &[Vec<f64>]) -> Result<FrequencyAxis> {
    FrequencyAxis::from_spectra(eigenvalue_lists)
}

pub fn axis_integer(m: usize) -> FrequencyAxis {
    FrequencyAxis::integer(m)
}

/// Signed per-axis offsets addressing one lattice point.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<i64>);

impl MultiIndex {
    pub fn zero(d: usize) -> Self {
        Self(vec![0; d])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&k| k == 0)
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|k| -k).collect())
    }

    /// Representative rule used throughout: the zero index, or an index whose
    /// first nonzero component is positive.
    pub fn is_positive_rep(&self) -> bool {
        Splitting::FirstNonzeroPositive.is_positive_rep(self)
    }
}

impl From<Vec<i64>> for MultiIndex {
    fn from(v: Vec<i64>) -> Self {
        Self(v)
    }
}

pub fn is_positive_rep(idx: &MultiIndex) -> bool {
    idx.is_positive_rep()
}

/// Rule choosing one representative out of each mirror pair `{k, -k}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Splitting {
    /// First nonzero component positive (the default everywhere).
    #[default]
    FirstNonzeroPositive,
    /// Last nonzero component positive.
    LastNonzeroPositive,
}

impl Splitting {
    pub fn is_positive_rep(self, idx: &MultiIndex) -> bool {
        let first = match self {
            Splitting::FirstNonzeroPositive => idx.0.iter().find(|&&k| k != 0),
            Splitting::LastNonzeroPositive => idx.0.iter().rev().find(|&&k| k != 0),
        };
        first.is_none_or(|&k| k > 0)
    }
}

/// Cartesian product of frequency axes.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyLattice {
    axes: Vec<FrequencyAxis>,
}

impl FrequencyLattice {
    pub fn new(axes: Vec<FrequencyAxis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidArgument("lattice needs at least one axis".into()));
        }
        Ok(Self { axes })
    }

    /// `d` integer axes with the same `m`.
    pub fn integer(d: usize, m: usize) -> Result<Self> {
        Self::new(vec![FrequencyAxis::integer(m); d])
    }

    pub fn axes(&self) -> &[FrequencyAxis] {
        &self.axes
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// Per-axis `M_j`.
    pub fn ms(&self) -> Vec<usize> {
        self.axes.iter().map(FrequencyAxis::m).collect()
    }

    /// Per-axis physical dimension `2M_j + 1`.
    pub fn phys_dims(&self) -> Vec<usize> {
        self.axes.iter().map(FrequencyAxis::len).collect()
    }

    /// Largest per-axis frequency count.
    pub fn max_axis_len(&self) -> usize {
        self.axes.iter().map(FrequencyAxis::len).max().unwrap_or(1)
    }

    /// Total number of lattice points, saturating at `u128::MAX`.
    pub fn size(&self) -> u128 {
        self.axes
            .iter()
            .fold(1u128, |acc, a| acc.saturating_mul(a.len() as u128))
    }

    /// Number of positive representatives, `(size + 1) / 2`.
    pub fn half_size(&self) -> u128 {
        self.size().div_ceil(2)
    }

    pub fn contains(&self, idx: &MultiIndex) -> bool {
        idx.len() == self.dim()
            && idx
                .0
                .iter()
                .zip(&self.axes)
                .all(|(&k, a)| k.unsigned_abs() as usize <= a.m())
    }

    pub fn check_index(&self, idx: &MultiIndex) -> Result<()> {
        if self.contains(idx) {
            Ok(())
        } else {
            Err(Error::IndexOutOfBounds {
                index: idx.0.clone(),
                bounds: self.ms(),
            })
        }
    }

    pub fn frequency_of(&self, idx: &MultiIndex) -> Result<Vec<f64>> {
        self.check_index(idx)?;
        Ok(idx
            .0
            .iter()
            .zip(&self.axes)
            .map(|(&k, a)| a.value(k).expect("bounds checked"))
            .collect())
    }

    /// Errors when the lattice is larger than `cap`.
    pub fn check_enumerable(&self, cap: u128) -> Result<()> {
        let size = self.size();
        if size > cap {
            Err(Error::EnumerationCap { size, cap })
        } else {
            Ok(())
        }
    }

    /// Every lattice point, first axis varying slowest. Exponential in `d`.
    pub fn iter(&self) -> LatticeIter {
        LatticeIter::new(self.ms())
    }

    /// Positive representatives under the default splitting.
    pub fn half_lattice(&self) -> impl Iterator<Item = MultiIndex> {
        self.half_lattice_with(Splitting::default())
    }

    pub fn half_lattice_with(&self, splitting: Splitting) -> impl Iterator<Item = MultiIndex> {
        self.iter().filter(move |idx| splitting.is_positive_rep(idx))
    }

    pub fn to_spec(&self) -> LatticeSpec {
        LatticeSpec {
            axes: self
                .axes
                .iter()
                .map(|a| AxisSpec::Values {
                    values: a.values.clone(),
                })
                .collect(),
        }
    }
}

pub fn frequency_of(lattice: &FrequencyLattice, idx: &MultiIndex) -> Result<Vec<f64>> {
    lattice.frequency_of(idx)
}

pub fn half_lattice(lattice: &FrequencyLattice) -> impl Iterator<Item = MultiIndex> {
    lattice.half_lattice()
}

/// Odometer over all multi-indices of a lattice.
#[derive(Debug, Clone)]
pub struct LatticeIter {
    ms: Vec<usize>,
    current: Option<Vec<i64>>,
}

impl LatticeIter {
    fn new(ms: Vec<usize>) -> Self {
        let start = ms.iter().map(|&m| -(m as i64)).collect();
        Self {
            ms,
            current: Some(start),
        }
    }
}

impl Iterator for LatticeIter {
    type Item = MultiIndex;

    fn next(&mut self) -> Option<MultiIndex> {
        let cur = self.current.take()?;
        let mut next = cur.clone();
        let mut j = next.len();
        loop {
            if j == 0 {
                break;
            }
            j -= 1;
            if next[j] < self.ms[j] as i64 {
                next[j] += 1;
                self.current = Some(next);
                break;
            }
            next[j] = -(self.ms[j] as i64);
        }
        Some(MultiIndex(cur))
    }
}

/// JSON description of one encoding axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AxisSpec {
    Integer {
        #[serde(rename = "integer_M")]
        integer_m: usize,
    },
    Spectra {
        spectra: Vec<Vec<f64>>,
    },
    /// Explicit frequency list; emitted when serializing a built lattice.
    Values { values: Vec<f64> },
}

impl AxisSpec {
    pub fn build(&self) -> Result<FrequencyAxis> {
        match self {
            AxisSpec::Integer { integer_m } => Ok(FrequencyAxis::integer(*integer_m)),
            AxisSpec::Spectra { spectra } => FrequencyAxis::from_spectra(spectra),
            AxisSpec::Values { values } => FrequencyAxis::new(values.clone()),
        }
    }
}

/// JSON description of an encoding strategy, one entry per data component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub axes: Vec<AxisSpec>,
}

impl LatticeSpec {
    pub fn build(&self) -> Result<FrequencyLattice> {
        FrequencyLattice::new(
            self.axes
                .iter()
                .map(AxisSpec::build)
                .collect::<Result<Vec<_>>>()?,
        )
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
