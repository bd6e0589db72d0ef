//! JSON data files for modular functor input.
//!
//! The file stores the *inverse* normalized S-matrix (every formula consumes
//! it), conformal weights and central charge as exact `"p/q"` strings, and
//! the label involution as an index permutation. The first label must be the
//! trivial one. Files are parsed and then validated; rejection lists every
//! failed invariant.

use modfun::frobenius::{validate_mf, ModularFunctorData};
use modfun::scalar::{format_rational, parse_rational, Scalar, Tolerance};
use serde::{Deserialize, Serialize};

#[derive(Debug, Serialize, Deserialize)]
pub struct MfConfigFile {
    pub name: String,
    pub labels: Vec<String>,
    pub dagger: Vec<usize>,
    /// K×K entries as [re, im] pairs
    pub s_under_inverse: Vec<Vec<[f64; 2]>>,
    /// conformal weights as "p/q" strings
    pub r: Vec<String>,
    /// central charge as "p/q"
    pub c: String,
}

impl MfConfigFile {
    pub fn from_mf(mf: &ModularFunctorData) -> Self {
        MfConfigFile {
            name: mf.name.clone(),
            labels: mf.labels.clone(),
            dagger: mf.dagger.clone(),
            s_under_inverse: mf
                .s_under_inv
                .iter()
                .map(|row| row.iter().map(|x| [x.re, x.im]).collect())
                .collect(),
            r: mf.r.iter().map(format_rational).collect(),
            c: format_rational(&mf.c),
        }
    }

    pub fn into_mf(self, tol: Tolerance) -> Result<ModularFunctorData, String> {
        let k = self.labels.len();
        if self.s_under_inverse.len() != k || self.s_under_inverse.iter().any(|row| row.len() != k) {
            return Err(format!("s_under_inverse must be {k}x{k}"));
        }
        let s_inv: Vec<Vec<Scalar>> = self
            .s_under_inverse
            .iter()
            .map(|row| row.iter().map(|&[re, im]| Scalar::new(re, im)).collect())
            .collect();
        let r = self
            .r
            .iter()
            .map(|s| parse_rational(s).ok_or_else(|| format!("bad rational '{s}' in r")))
            .collect::<Result<Vec<_>, _>>()?;
        let c = parse_rational(&self.c).ok_or_else(|| format!("bad rational '{}' in c", self.c))?;
        let mf = ModularFunctorData::from_s_under_inverse(self.name, self.labels, self.dagger, s_inv, r, c)
            .map_err(|e| e.to_string())?;
        let report = validate_mf(&mf, tol);
        if !report.all_hard_passed() {
            let failures: Vec<String> = report.hard_failures().map(|c| format!("{} (deviation {:.3e})", c.name, c.deviation)).collect();
            return Err(format!("invalid modular functor data:\n  {}", failures.join("\n  ")));
        }
        Ok(mf)
    }
}

pub fn load_mf(path: &std::path::Path, tol: Tolerance) -> Result<ModularFunctorData, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let cfg: MfConfigFile = serde_json::from_str(&text).map_err(|e| format!("cannot parse {}: {e}", path.display()))?;
    cfg.into_mf(tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use modfun::catalog::su2_level;

    #[test]
    fn round_trip_preserves_entries() {
        let mf = su2_level(2).unwrap();
        let cfg = MfConfigFile::from_mf(&mf);
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back: MfConfigFile = serde_json::from_str(&text).unwrap();
        let mf2 = back.into_mf(Tolerance::default()).unwrap();
        assert_eq!(mf.labels, mf2.labels);
        assert_eq!(mf.r, mf2.r);
        assert_eq!(mf.c, mf2.c);
        for i in 0..mf.k() {
            for j in 0..mf.k() {
                assert!((mf.s_inv(i, j) - mf2.s_inv(i, j)).norm() < 1e-15);
                assert!((mf.s(i, j) - mf2.s(i, j)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn corrupt_entry_is_rejected_with_named_invariant() {
        let mf = su2_level(1).unwrap();
        let mut cfg = MfConfigFile::from_mf(&mf);
        cfg.s_under_inverse[0][1][0] += 1e-3;
        let err = cfg.into_mf(Tolerance::default()).unwrap_err();
        assert!(err.contains("S̲ᵀS̲ = C"), "{err}");
    }
}
