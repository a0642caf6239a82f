use serde::{Deserialize, Serialize};

use super::linalg::{cholesky, spd_inverse};
use super::query::{index_of, resolve_names, validate_names, CIQuery};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::varset::VarSet;

/// Multivariate normal model given by its covariance over named variables.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianModel<T> {
    variables: Vec<String>,
    cov: Vec<T>,
}

#[derive(Serialize, Deserialize)]
struct GaussianRepr<T> {
    variables: Vec<String>,
    covariance: Vec<Vec<T>>,
}

impl<T: Real + Serialize> Serialize for GaussianModel<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.n();
        GaussianRepr {
            variables: self.variables.clone(),
            covariance: (0..n).map(|i| self.cov[i * n..(i + 1) * n].to_vec()).collect(),
        }
        .serialize(s)
    }
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for GaussianModel<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = GaussianRepr::<T>::deserialize(d)?;
        GaussianModel::new(r.variables, r.covariance).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GaussianCiOutcome<T> {
    pub holds: bool,
    pub max_abs_pcor: T,
}

impl<T: Real> GaussianModel<T> {
    pub fn new(variables: Vec<String>, covariance: Vec<Vec<T>>) -> Result<Self> {
        validate_names(&variables)?;
        let n = variables.len();
        if covariance.len() != n || covariance.iter().any(|row| row.len() != n) {
            return Err(Error::Model(format!("covariance must be {n}x{n}")));
        }
        let cov: Vec<T> = covariance.into_iter().flatten().collect();
        if cov.iter().any(|v| !v.is_finite()) {
            return Err(Error::Model("covariance has non-finite entries".into()));
        }
        for i in 0..n {
            if !(cov[i * n + i] > T::zero()) {
                return Err(Error::Model(format!("variance of `{}` is not positive", variables[i])));
            }
            for j in 0..i {
                if (cov[i * n + j] - cov[j * n + i]).abs().as_f64() > T::SYMMETRY_TOL {
                    return Err(Error::Model("covariance is not symmetric".into()));
                }
            }
        }
        if cholesky(&cov, n).is_none() {
            return Err(Error::Model("covariance is not positive definite".into()));
        }
        Ok(GaussianModel { variables, cov })
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn n(&self) -> usize {
        self.variables.len()
    }

    pub fn covariance(&self, i: usize, j: usize) -> T {
        self.cov[i * self.n() + j]
    }

    /// Partial correlation of `x` and `y` given `z`.
    pub fn partial_correlation<I>(&self, x: &str, y: &str, z: I) -> Result<T>
    where
        I: IntoIterator,
        I::Item: AsRef<str>,
    {
        let xi = index_of(&self.variables, x)?;
        let yi = index_of(&self.variables, y)?;
        let zs = resolve_names(&self.variables, z)?;
        if xi == yi || zs.contains(xi) || zs.contains(yi) {
            return Err(Error::Query("x and y must be distinct and outside the conditioning set".into()));
        }
        self.pcor_idx(xi, yi, zs)
    }

    /// Normalized precision entry of the covariance restricted to `{x, y} ∪ z`.
    pub(crate) fn pcor_idx(&self, x: usize, y: usize, z: VarSet) -> Result<T> {
        let idx: Vec<usize> = [x, y].into_iter().chain(z.iter()).collect();
        let m = idx.len();
        let mut sub = Vec::with_capacity(m * m);
        for &i in &idx {
            for &j in &idx {
                sub.push(self.covariance(i, j));
            }
        }
        let k = spd_inverse(&sub, m)
            .ok_or_else(|| Error::Model("restricted covariance is not positive definite".into()))?;
        let r = -k[1] / (k[0] * k[m + 1]).sqrt();
        Ok(r.max(-T::one()).min(T::one()))
    }

    pub fn is_ci(&self, q: &CIQuery, tol: T) -> Result<GaussianCiOutcome<T>> {
        if !(tol >= T::zero()) {
            return Err(Error::Query("tolerance must be nonnegative".into()));
        }
        let (x, y, z) = q.resolve(&self.variables)?;
        let max_abs_pcor = self.max_abs_pcor(x, y, z)?;
        Ok(GaussianCiOutcome { holds: max_abs_pcor <= tol, max_abs_pcor })
    }

    pub(crate) fn max_abs_pcor(&self, x: VarSet, y: VarSet, z: VarSet) -> Result<T> {
        let mut max = T::zero();
        for xi in x.iter() {
            for yi in y.iter() {
                max = max.max(self.pcor_idx(xi, yi, z)?.abs());
            }
        }
        Ok(max)
    }

    pub fn cast<U: Real>(&self) -> Result<GaussianModel<U>> {
        let n = self.n();
        let rows = (0..n).map(|i| (0..n).map(|j| U::lit(self.covariance(i, j).as_f64())).collect()).collect();
        GaussianModel::new(self.variables.clone(), rows)
    }
}

/// All partial correlations of a small model, indexed by pair and conditioning set.
pub(crate) struct PcorCache<T> {
    n: usize,
    values: Vec<T>,
}

pub(crate) const MAX_PCOR_CACHE_VARS: usize = 10;

impl<T: Real> PcorCache<T> {
    pub(crate) fn new(g: &GaussianModel<T>) -> Result<Self> {
        let n = g.n();
        if n > MAX_PCOR_CACHE_VARS {
            return Err(Error::Resource(format!(
                "exhaustive Gaussian scans are limited to {MAX_PCOR_CACHE_VARS} variables"
            )));
        }
        let mut values = vec![T::zero(); (n * n) << n];
        for x in 0..n {
            for y in (x + 1)..n {
                let rest = VarSet::full(n).minus(VarSet::singleton(x).with(y));
                // enumerate subsets of `rest`
                let mut s = rest.0;
                loop {
                    let r = g.pcor_idx(x, y, VarSet(s))?;
                    values[((x * n + y) << n) | s as usize] = r;
                    values[((y * n + x) << n) | s as usize] = r;
                    if s == 0 {
                        break;
                    }
                    s = (s - 1) & rest.0;
                }
            }
        }
        Ok(PcorCache { n, values })
    }

    pub(crate) fn max_abs(&self, x: VarSet, y: VarSet, z: VarSet) -> T {
        let mut max = T::zero();
        for xi in x.iter() {
            for yi in y.iter() {
                max = max.max(self.values[((xi * self.n + yi) << self.n) | z.0 as usize].abs());
            }
        }
        max
    }
}
