//! Binary linear classification as MAX FS.
//!
//! Each point becomes one row over the free variables `w_1..w_J, w_0`:
//! class 0 points need `d·w - w_0 <= -ε` and class 1 points
//! `d·w - w_0 >= ε`. The removed rows are the points the hyperplane gives
//! up on.

use std::collections::HashMap;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::elastic::{ElasticMode, ElasticModel};
use crate::error::{Error, Result};
use crate::heuristic::{solve_maxfs, Algorithm, StrategyConfig};
use crate::system::{LinearSystem, Sense};

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    /// Row-major `I x J`.
    points: Vec<f64>,
    labels: Vec<u8>,
    num_features: usize,
    pub feature_names: Vec<String>,
}

/// How label strings map to classes.
#[derive(Clone, Debug, PartialEq)]
pub enum LabelMapping {
    /// Labels must already be `0` or `1`.
    ZeroOne,
    /// This label is class 1, everything else class 0.
    OneVsRest(String),
    /// Every label must appear in the map.
    Explicit(HashMap<String, u8>),
}

impl LabelMapping {
    fn class_of(&self, label: &str) -> Option<u8> {
        match self {
            LabelMapping::ZeroOne => match label.trim().parse::<f64>().ok()? {
                v if v == 0.0 => Some(0),
                v if v == 1.0 => Some(1),
                _ => None,
            },
            LabelMapping::OneVsRest(pos) => Some(u8::from(label == pos)),
            LabelMapping::Explicit(map) => map.get(label).copied(),
        }
    }
}

impl FromStr for LabelMapping {
    type Err = Error;

    /// `a=0,b=1` gives an explicit map, a bare value gives one-vs-rest.
    fn from_str(s: &str) -> Result<Self> {
        if !s.contains('=') {
            return Ok(LabelMapping::OneVsRest(s.to_string()));
        }
        let mut map = HashMap::new();
        for pair in s.split(',') {
            let (label, class) = pair
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("bad label mapping entry `{pair}`")))?;
            let class = match class.trim() {
                "0" => 0,
                "1" => 1,
                other => {
                    return Err(Error::InvalidInput(format!(
                        "class for `{label}` must be 0 or 1, got `{other}`"
                    )))
                }
            };
            map.insert(label.trim().to_string(), class);
        }
        Ok(LabelMapping::Explicit(map))
    }
}

impl Dataset {
    pub fn new(num_features: usize, points: Vec<f64>, labels: Vec<u8>) -> Result<Self> {
        let ds = Dataset {
            feature_names: (1..=num_features).map(|j| format!("x{j}")).collect(),
            points,
            labels,
            num_features,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        if self.labels.is_empty() {
            return Err(Error::InvalidInput("dataset has no points".into()));
        }
        if self.num_features == 0 {
            return Err(Error::InvalidInput("dataset has no features".into()));
        }
        if self.points.len() != self.labels.len() * self.num_features {
            return Err(Error::InvalidInput(format!(
                "{} values for {} points of {} features",
                self.points.len(),
                self.labels.len(),
                self.num_features
            )));
        }
        if self.points.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("feature values must be finite".into()));
        }
        if self.labels.iter().any(|&l| l > 1) {
            return Err(Error::InvalidInput("labels must be 0 or 1".into()));
        }
        if self.labels.iter().all(|&l| l == self.labels[0]) {
            return Err(Error::InvalidInput(format!(
                "every point has label {}; need both classes",
                self.labels[0]
            )));
        }
        Ok(())
    }

    /// Reads a numeric CSV with a header row. `ignore` names columns to
    /// skip, such as identifiers.
    pub fn from_csv_reader<R: Read>(
        reader: R,
        label_col: &str,
        mapping: &LabelMapping,
        ignore: &[String],
    ) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let label_idx = headers
            .iter()
            .position(|h| h == label_col)
            .ok_or_else(|| Error::InvalidInput(format!("no column named `{label_col}`")))?;
        for name in ignore {
            if !headers.iter().any(|h| h == name) {
                return Err(Error::InvalidInput(format!("no column named `{name}`")));
            }
        }
        let feature_cols: Vec<usize> = (0..headers.len())
            .filter(|&c| c != label_idx && !ignore.iter().any(|n| n == &headers[c]))
            .collect();

        let mut points = Vec::new();
        let mut labels = Vec::new();
        for (k, record) in rdr.records().enumerate() {
            let record = record?;
            let line = k + 2;
            let label = &record[label_idx];
            let class = mapping.class_of(label).ok_or_else(|| Error::Parse {
                line,
                msg: format!("label `{label}` has no class"),
            })?;
            for &c in &feature_cols {
                let v: f64 = record[c].parse().map_err(|_| Error::Parse {
                    line,
                    msg: format!("column `{}`: `{}` is not a number", &headers[c], &record[c]),
                })?;
                points.push(v);
            }
            labels.push(class);
        }
        let ds = Dataset {
            points,
            labels,
            num_features: feature_cols.len(),
            feature_names: feature_cols.iter().map(|&c| headers[c].to_string()).collect(),
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn from_csv_path(
        path: impl AsRef<Path>,
        label_col: &str,
        mapping: &LabelMapping,
        ignore: &[String],
    ) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(file, label_col, mapping, ignore)
    }

    pub fn num_points(&self) -> usize {
        self.labels.len()
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.num_features..(i + 1) * self.num_features]
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }
}

/// The hyperplane `w·d = w_0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    pub weights: Vec<f64>,
    pub offset: f64,
}

impl Hyperplane {
    pub fn margin(&self, d: &[f64]) -> f64 {
        d.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>() - self.offset
    }

    /// Points exactly on the hyperplane go to class 1.
    pub fn classify(&self, d: &[f64]) -> u8 {
        u8::from(self.margin(d) >= 0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassifierAlgorithm {
    /// Algorithm 2 with an unlimited list.
    #[serde(rename = "2inf")]
    Alg2Inf,
    /// Algorithm 2 with a list of one.
    #[serde(rename = "2k1")]
    Alg2K1,
    /// Algorithm 2 with Extension 1.
    #[serde(rename = "2e1")]
    Alg2E1,
}

impl ClassifierAlgorithm {
    pub fn config(self) -> StrategyConfig {
        match self {
            ClassifierAlgorithm::Alg2Inf => StrategyConfig::new(Algorithm::Alg2, None),
            ClassifierAlgorithm::Alg2K1 => StrategyConfig::new(Algorithm::Alg2, Some(1)),
            ClassifierAlgorithm::Alg2E1 => StrategyConfig::new(Algorithm::Alg2, None).with_e1(),
        }
    }
}

impl fmt::Display for ClassifierAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassifierAlgorithm::Alg2Inf => "2inf",
            ClassifierAlgorithm::Alg2K1 => "2k1",
            ClassifierAlgorithm::Alg2E1 => "2e1",
        })
    }
}

impl FromStr for ClassifierAlgorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "2inf" => Ok(ClassifierAlgorithm::Alg2Inf),
            "2k1" => Ok(ClassifierAlgorithm::Alg2K1),
            "2e1" => Ok(ClassifierAlgorithm::Alg2E1),
            _ => Err(format!("unknown algorithm `{s}`, expected 2inf, 2k1 or 2e1")),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassificationReport {
    pub algorithm: String,
    pub hyperplane: Hyperplane,
    /// Fraction of all points classified correctly.
    pub accuracy: f64,
    pub misclassified: Vec<usize>,
    /// Points whose rows were removed.
    pub removed_points: Vec<usize>,
    pub lp_count: usize,
    pub seconds: f64,
    pub removal_sizes: Vec<usize>,
}

/// One row of the benchmark CSV.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassificationRow {
    pub dataset: String,
    pub algorithm: String,
    pub accuracy: f64,
    pub lp_count: usize,
    pub seconds: f64,
}

impl ClassificationReport {
    pub fn row(&self, dataset: &str) -> ClassificationRow {
        ClassificationRow {
            dataset: dataset.to_string(),
            algorithm: self.algorithm.clone(),
            accuracy: self.accuracy,
            lp_count: self.lp_count,
            seconds: self.seconds,
        }
    }
}

pub fn build_constraints(ds: &Dataset, epsilon: f64) -> Result<LinearSystem> {
    ds.validate()?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidInput(format!("epsilon must be positive, got {epsilon}")));
    }
    let mut rows = Vec::with_capacity(ds.num_points());
    let mut senses = Vec::with_capacity(ds.num_points());
    let mut rhs = Vec::with_capacity(ds.num_points());
    for i in 0..ds.num_points() {
        let mut row = ds.point(i).to_vec();
        row.push(-1.0);
        rows.push(row);
        if ds.labels[i] == 0 {
            senses.push(Sense::Le);
            rhs.push(-epsilon);
        } else {
            senses.push(Sense::Ge);
            rhs.push(epsilon);
        }
    }
    LinearSystem::new(ds.num_features + 1, rows, senses, rhs)
}

/// Runs `cfg` on the classification system of `ds` and scores the final
/// hyperplane on every point.
pub fn classify_with(
    ds: &Dataset,
    epsilon: f64,
    cfg: &StrategyConfig,
    name: &str,
) -> Result<ClassificationReport> {
    let sys = build_constraints(ds, epsilon)?;
    let mut model = ElasticModel::new(sys, ElasticMode::Standard)?;
    let r = solve_maxfs(&mut model, cfg)?;
    let j = ds.num_features;
    let hyperplane = Hyperplane {
        weights: r.x[..j].to_vec(),
        offset: r.x[j],
    };
    if hyperplane.weights.iter().all(|w| *w == 0.0) {
        warn!("all hyperplane weights are zero; every point gets the same class");
    }
    let misclassified: Vec<usize> = (0..ds.num_points())
        .filter(|&i| hyperplane.classify(ds.point(i)) != ds.labels[i])
        .collect();
    let accuracy = 1.0 - misclassified.len() as f64 / ds.num_points() as f64;
    Ok(ClassificationReport {
        algorithm: name.to_string(),
        hyperplane,
        accuracy,
        misclassified,
        removed_points: r.min_ulr.entities(),
        lp_count: r.lp_count,
        seconds: r.seconds,
        removal_sizes: r.removal_sizes,
    })
}

pub fn classify(ds: &Dataset, epsilon: f64, alg: ClassifierAlgorithm) -> Result<ClassificationReport> {
    classify_with(ds, epsilon, &alg.config(), &alg.to_string())
}

/// Algorithm 2 with Extension 1.
pub fn classify_2e1(ds: &Dataset, epsilon: f64) -> Result<ClassificationReport> {
    classify(ds, epsilon, ClassifierAlgorithm::Alg2E1)
}

/// Algorithm 2(∞) or 2(1).
pub fn classify_comparator(
    ds: &Dataset,
    epsilon: f64,
    variant: ClassifierAlgorithm,
) -> Result<ClassificationReport> {
    classify(ds, epsilon, variant)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xor4() -> Dataset {
        Dataset::new(2, vec![0., 0., 1., 1., 0., 1., 1., 0.], vec![0, 0, 1, 1]).unwrap()
    }

    #[test]
    fn separable_pair_in_one_dimension() {
        let ds = Dataset::new(1, vec![0., 1.], vec![0, 1]).unwrap();
        let sys = build_constraints(&ds, 0.5).unwrap();
        assert_eq!(sys.senses(), &[Sense::Le, Sense::Ge]);
        assert_eq!(sys.rhs(), &[-0.5, 0.5]);
        // w = 2, w_0 = 1 satisfies both rows
        for i in 0..2 {
            assert_eq!(sys.row_violation(i, &[2.0, 1.0]), 0.0);
        }
        for alg in [ClassifierAlgorithm::Alg2E1, ClassifierAlgorithm::Alg2Inf, ClassifierAlgorithm::Alg2K1] {
            let r = classify(&ds, 0.5, alg).unwrap();
            assert_eq!(r.accuracy, 1.0);
            assert_eq!(r.lp_count, 1);
            assert!(r.removed_points.is_empty());
        }
    }

    #[test]
    fn xor_loses_one_point() {
        for alg in [ClassifierAlgorithm::Alg2E1, ClassifierAlgorithm::Alg2Inf, ClassifierAlgorithm::Alg2K1] {
            let r = classify(&xor4(), 1.0, alg).unwrap();
            assert_eq!(r.accuracy, 0.75, "{alg}");
        }
    }

    #[test]
    fn single_class_and_bad_epsilon_are_rejected() {
        assert!(Dataset::new(1, vec![0., 1.], vec![0, 0]).is_err());
        assert!(build_constraints(&xor4(), 0.0).is_err());
    }

    #[test]
    fn ties_go_to_class_one() {
        let h = Hyperplane {
            weights: vec![1.0],
            offset: 2.0,
        };
        assert_eq!(h.classify(&[2.0]), 1);
        assert_eq!(h.classify(&[1.9]), 0);
    }

    #[test]
    fn csv_loading_with_mapping() {
        let text = "id,a,b,kind\n1,0.5,1,yes\n2,2,3,no\n";
        let map: LabelMapping = "yes=1,no=0".parse().unwrap();
        let ds = Dataset::from_csv_reader(text.as_bytes(), "kind", &map, &["id".into()]).unwrap();
        assert_eq!(ds.num_features(), 2);
        assert_eq!(ds.labels(), &[1, 0]);
        assert_eq!(ds.point(1), &[2.0, 3.0]);
        assert_eq!(ds.feature_names, vec!["a", "b"]);

        let bad = "a,kind\nx,1\ny,0\n";
        let err = Dataset::from_csv_reader(bad.as_bytes(), "kind", &LabelMapping::ZeroOne, &[])
            .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));

        let ovr = LabelMapping::OneVsRest("yes".into());
        let ds = Dataset::from_csv_reader(text.as_bytes(), "kind", &ovr, &[]).unwrap();
        assert_eq!(ds.labels(), &[1, 0]);
    }
}
