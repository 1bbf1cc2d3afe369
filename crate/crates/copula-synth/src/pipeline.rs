//! End-to-end synthesis: `fit` encodes categorical columns, fits one
//! empirical marginal per (numeric or encoded) column and a copula
//! correlation matrix over all of them; `generate` samples the copula,
//! pushes each uniform column through its marginal's generalized inverse,
//! and decodes categorical columns back to labels.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::categorical::{decode_categorical, encode_categorical, CategoricalEncoding};
use crate::copula::{
    fit_correlation_matrix, sample_copula, CopulaFamily, CopulaSpec, CorrelationFitMethod,
};
use crate::error::{Error, Result};
use crate::marginal::{inverse_transform_column, Ecdf};
use crate::numerics::rng::RandomSource;
use crate::par;
use crate::table::{Column, ColumnKind, DataTable};

/// Everything `fit` needs beyond the table itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub family: CopulaFamily,
    /// Degrees of freedom; required (and only meaningful) for Student-t.
    pub nu: Option<f64>,
    pub method: CorrelationFitMethod,
    /// Confidence multiplier stored with categorical encodings.
    pub z: f64,
    pub seed: u64,
    /// Columns dropped before fitting (deterministic ingestion rule, not
    /// a heuristic).
    pub excluded_columns: Vec<String>,
    /// Whether categorical tie decoding may align with original rows when
    /// the generated row count matches the training row count.
    pub align_original: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            family: CopulaFamily::Gaussian,
            nu: None,
            method: CorrelationFitMethod::KendallInversion,
            z: 1.96,
            seed: 0,
            excluded_columns: Vec::new(),
            align_original: true,
        }
    }
}

impl FitConfig {
    fn validate(&self) -> Result<()> {
        // The Spearman shortcut is a meta-Gaussian identity; only the
        // Kendall relation carries over to the t family, so t fitting is
        // restricted to it.
        if self.family == CopulaFamily::StudentT
            && self.method != CorrelationFitMethod::KendallInversion
        {
            return Err(Error::domain(
                "fit config: the Student-t family fits through Kendall inversion only",
            ));
        }
        match (self.family, self.nu) {
            (CopulaFamily::StudentT, None) => Err(Error::domain(
                "fit config: Student-t family requires degrees of freedom",
            )),
            (CopulaFamily::StudentT, Some(nu)) if nu.is_nan() || nu <= 2.0 => Err(Error::domain(format!(
                "fit config: Student-t degrees of freedom must exceed 2, got {nu}"
            ))),
            (CopulaFamily::Gaussian, Some(nu)) => Err(Error::domain(format!(
                "fit config: Gaussian family takes no degrees of freedom (got {nu})"
            ))),
            _ => Ok(()),
        }
    }
}

/// Per-categorical-column state kept by the model: the encoding plus the
/// training labels that step-9 tie alignment needs at generate time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedColumn {
    pub encoding: CategoricalEncoding,
    pub training_labels: Vec<String>,
}

/// A fitted synthesis model: the copula, one marginal per column, and
/// categorical encodings at their original column positions.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthModel {
    copula: CopulaSpec,
    column_names: Vec<String>,
    column_kinds: Vec<ColumnKind>,
    marginals: Vec<Ecdf>,
    encodings: Vec<Option<EncodedColumn>>,
    training_n: usize,
    config: FitConfig,
}

impl SynthModel {
    pub fn copula(&self) -> &CopulaSpec {
        &self.copula
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn column_kinds(&self) -> &[ColumnKind] {
        &self.column_kinds
    }

    pub fn marginals(&self) -> &[Ecdf] {
        &self.marginals
    }

    pub fn encoding(&self, j: usize) -> Option<&EncodedColumn> {
        self.encodings[j].as_ref()
    }

    pub fn n_encodings(&self) -> usize {
        self.encodings.iter().flatten().count()
    }

    pub fn training_n(&self) -> usize {
        self.training_n
    }

    pub fn config(&self) -> &FitConfig {
        &self.config
    }

    /// Overrides the tie-alignment setting recorded at fit time.
    pub fn set_align_original(&mut self, align: bool) {
        self.config.align_original = align;
    }
}

/// Fits a synthesis model to a table.
///
/// Categorical column at position j is encoded with the stream derived
/// from the config seed by the column index, so per-column work can run
/// in any order or in parallel without changing results.
pub fn fit(table: &DataTable, config: &FitConfig) -> Result<SynthModel> {
    config.validate()?;
    let table = if config.excluded_columns.is_empty() {
        table.clone()
    } else {
        table.without_columns(&config.excluded_columns)?
    };
    if table.n_cols() < 2 {
        return Err(Error::dimension(format!(
            "fit: need at least 2 columns after exclusions, got {}",
            table.n_cols()
        )));
    }

    // Constant columns cannot carry rank information; name the offender
    // before the correlation stage reports a bare index.
    for j in 0..table.n_cols() {
        let constant = match table.column(j) {
            Column::Numeric(v) => v.windows(2).all(|w| w[0] == w[1]),
            Column::Categorical(v) => v.windows(2).all(|w| w[0] == w[1]),
        };
        if constant {
            return Err(Error::degenerate(format!(
                "fit: column {:?} is constant",
                table.name(j)
            )));
        }
    }

    let root = RandomSource::new(config.seed, 0);
    let mut numeric: Vec<Vec<f64>> = Vec::with_capacity(table.n_cols());
    let mut encodings: Vec<Option<EncodedColumn>> = Vec::with_capacity(table.n_cols());
    for j in 0..table.n_cols() {
        match table.column(j) {
            Column::Numeric(v) => {
                numeric.push(v.clone());
                encodings.push(None);
            }
            Column::Categorical(labels) => {
                let mut enc_rng = root.child(j as u64);
                let (encoding, values) = encode_categorical(labels, &mut enc_rng, config.z)?;
                numeric.push(values);
                encodings.push(Some(EncodedColumn {
                    encoding,
                    training_labels: labels.clone(),
                }));
            }
        }
    }

    let marginals: Vec<Ecdf> = numeric
        .iter()
        .map(|col| Ecdf::fit(col))
        .collect::<Result<_>>()?;

    let correlation = fit_correlation_matrix(&numeric, config.method).map_err(|e| match e {
        Error::Degenerate(msg) => Error::degenerate(format!("fit: {msg}")),
        other => other,
    })?;

    let copula = CopulaSpec {
        family: config.family,
        correlation,
        nu: config.nu,
    }
    .validated()?;

    Ok(SynthModel {
        copula,
        column_names: table.names().to_vec(),
        column_kinds: (0..table.n_cols()).map(|j| table.kind(j)).collect(),
        marginals,
        encodings,
        training_n: table.n_rows(),
        config: config.clone(),
    })
}

/// Samples a synthetic table of `n_rows` from a fitted model.
///
/// Original-row tie alignment for categorical decoding applies exactly
/// when `n_rows` equals the training row count and the fit config enabled
/// it. Deterministic given `rng`.
pub fn generate(model: &SynthModel, n_rows: usize, rng: &mut RandomSource) -> Result<DataTable> {
    if n_rows == 0 {
        return Err(Error::domain("generate: n_rows must be at least 1"));
    }
    let uniform = sample_copula(&model.copula, n_rows, rng)?;

    let values: Vec<Vec<f64>> = par::try_map_indexed(model.marginals.len(), |j| {
        inverse_transform_column(&model.marginals[j], uniform.column(j))
    })?;

    let align = model.config.align_original && n_rows == model.training_n;
    let mut columns = Vec::with_capacity(values.len());
    for (j, column_values) in values.into_iter().enumerate() {
        match &model.encodings[j] {
            None => columns.push(Column::Numeric(column_values)),
            Some(enc) => {
                let mut decode_rng = rng.split();
                let original = align.then_some(enc.training_labels.as_slice());
                let labels =
                    decode_categorical(&enc.encoding, &column_values, original, &mut decode_rng)?;
                columns.push(Column::Categorical(labels));
            }
        }
    }
    DataTable::new(model.column_names.to_vec(), columns)
}

// ---------------------------------------------------------------------------
// model serialization
// ---------------------------------------------------------------------------

/// Version string written at the top of every model file.
pub const MODEL_FORMAT_VERSION: &str = "copula-synth/1";

#[derive(Serialize, Deserialize)]
struct ColumnRecord {
    name: String,
    kind: ColumnKind,
    /// Sorted ECDF support of the (possibly encoded) column.
    marginal: Ecdf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    encoding: Option<EncodedColumn>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: String,
    family: CopulaFamily,
    #[serde(default)]
    nu: Option<f64>,
    correlation: crate::numerics::matrix::CorrelationMatrix,
    columns: Vec<ColumnRecord>,
    training_n: usize,
    config: FitConfig,
}

impl SynthModel {
    pub fn to_json_string(&self) -> String {
        let file = ModelFile {
            version: MODEL_FORMAT_VERSION.to_string(),
            family: self.copula.family,
            nu: self.copula.nu,
            correlation: self.copula.correlation.clone(),
            columns: (0..self.column_names.len())
                .map(|j| ColumnRecord {
                    name: self.column_names[j].clone(),
                    kind: self.column_kinds[j],
                    marginal: self.marginals[j].clone(),
                    encoding: self.encodings[j].clone(),
                })
                .collect(),
            training_n: self.training_n,
            config: self.config.clone(),
        };
        serde_json::to_string_pretty(&file).expect("model serialization cannot fail")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: ModelFile =
            serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
        if file.version != MODEL_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported model version {:?}, expected {MODEL_FORMAT_VERSION:?}",
                file.version
            )));
        }
        let copula = CopulaSpec {
            family: file.family,
            correlation: file.correlation,
            nu: file.nu,
        }
        .validated()?;
        if copula.dim() != file.columns.len() {
            return Err(Error::Format(format!(
                "model file: correlation dimension {} does not match {} columns",
                copula.dim(),
                file.columns.len()
            )));
        }
        let mut column_names = Vec::new();
        let mut column_kinds = Vec::new();
        let mut marginals = Vec::new();
        let mut encodings = Vec::new();
        for record in file.columns {
            match (record.kind, &record.encoding) {
                (ColumnKind::Categorical, None) => {
                    return Err(Error::Format(format!(
                        "model file: categorical column {:?} lacks an encoding",
                        record.name
                    )))
                }
                (ColumnKind::Numeric, Some(_)) => {
                    return Err(Error::Format(format!(
                        "model file: numeric column {:?} carries an encoding",
                        record.name
                    )))
                }
                _ => {}
            }
            if let Some(enc) = &record.encoding {
                enc.encoding.check_consistency()?;
            }
            column_names.push(record.name);
            column_kinds.push(record.kind);
            marginals.push(record.marginal);
            encodings.push(record.encoding);
        }
        Ok(SynthModel {
            copula,
            column_names,
            column_kinds,
            marginals,
            encodings,
            training_n: file.training_n,
            config: file.config,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::Column;

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    pub(crate) fn vehicle_color_table() -> DataTable {
        DataTable::new(
            vec!["VEHICLE".into(), "COLOR".into()],
            vec![
                Column::Categorical(strings(&[
                    "CAR", "BUS", "BICYCLE", "BUS", "CAR", "BUS", "CAR", "BICYCLE", "BICYCLE",
                    "BUS",
                ])),
                Column::Categorical(strings(&[
                    "BLUE", "GREEN", "GREEN", "BLUE", "GREEN", "BLUE", "GREEN", "BLUE", "BLUE",
                    "GREEN",
                ])),
            ],
        )
        .unwrap()
    }

    #[test]
    fn fit_two_categorical_columns() {
        let model = fit(&vehicle_color_table(), &FitConfig::default()).unwrap();
        assert_eq!(model.n_encodings(), 2);
        assert_eq!(model.marginals().len(), 2);
        assert_eq!(model.copula().dim(), 2);
        assert_eq!(model.training_n(), 10);
        let enc = model.encoding(0).unwrap();
        assert_eq!(enc.encoding.proportions(), &[0.3, 0.4, 0.3]);
    }

    #[test]
    fn fit_pure_numeric_table() {
        let mut rng = RandomSource::new(1, 0);
        let columns: Vec<Column> = (0..3)
            .map(|_| Column::Numeric((0..50).map(|_| rng.next_std_normal()).collect()))
            .collect();
        let table =
            DataTable::new(vec!["x".into(), "y".into(), "z".into()], columns).unwrap();
        let model = fit(&table, &FitConfig::default()).unwrap();
        assert_eq!(model.n_encodings(), 0);
        assert_eq!(model.marginals().len(), 3);
    }

    #[test]
    fn fit_rejects_constant_and_single_column() {
        let t = DataTable::new(
            vec!["a".into(), "b".into()],
            vec![
                Column::Numeric(vec![1.0, 2.0, 3.0]),
                Column::Numeric(vec![7.0, 7.0, 7.0]),
            ],
        )
        .unwrap();
        match fit(&t, &FitConfig::default()) {
            Err(Error::Degenerate(msg)) => assert!(msg.contains("\"b\""), "{msg}"),
            other => panic!("expected degenerate error, got {other:?}"),
        }

        let single = DataTable::new(
            vec!["a".into()],
            vec![Column::Numeric(vec![1.0, 2.0, 3.0])],
        )
        .unwrap();
        assert!(matches!(
            fit(&single, &FitConfig::default()),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn fit_applies_exclusions() {
        let t = DataTable::new(
            vec!["a".into(), "b".into(), "t".into()],
            vec![
                Column::Numeric(vec![1.0, 2.0, 3.0, 4.0]),
                Column::Numeric(vec![4.0, 3.0, 1.0, 2.0]),
                Column::Numeric(vec![0.0, 1.0, 2.0, 3.0]),
            ],
        )
        .unwrap();
        let config = FitConfig { excluded_columns: vec!["t".into()], ..Default::default() };
        let model = fit(&t, &config).unwrap();
        assert_eq!(model.column_names(), &["a".to_string(), "b".to_string()]);
        assert_eq!(model.copula().dim(), 2);
    }

    #[test]
    fn generate_preserves_schema_and_support() {
        let table = vehicle_color_table();
        let model = fit(&table, &FitConfig::default()).unwrap();
        let mut rng = RandomSource::new(0, 1);
        let out = generate(&model, 10, &mut rng).unwrap();
        assert_eq!(out.names(), table.names());
        assert_eq!(out.n_rows(), 10);
        for j in 0..out.n_cols() {
            assert_eq!(out.kind(j), table.kind(j));
        }
        let vehicles = out.categorical(0).unwrap();
        assert!(vehicles
            .iter()
            .all(|l| ["CAR", "BUS", "BICYCLE"].contains(&l.as_str())));
        let colors = out.categorical(1).unwrap();
        assert!(colors.iter().all(|l| ["BLUE", "GREEN"].contains(&l.as_str())));
    }

    #[test]
    fn generate_is_deterministic() {
        let model = fit(&vehicle_color_table(), &FitConfig::default()).unwrap();
        let mut r1 = RandomSource::new(7, 1);
        let mut r2 = RandomSource::new(7, 1);
        let a = generate(&model, 25, &mut r1).unwrap();
        let b = generate(&model, 25, &mut r2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn numeric_outputs_stay_in_training_support() {
        let mut rng = RandomSource::new(2, 0);
        let x: Vec<f64> = (0..200).map(|_| rng.next_std_normal()).collect();
        let y: Vec<f64> = x.iter().map(|v| v * 2.0 + rng.next_std_normal()).collect();
        let table = DataTable::new(
            vec!["x".into(), "y".into()],
            vec![Column::Numeric(x.clone()), Column::Numeric(y)],
        )
        .unwrap();
        let model = fit(&table, &FitConfig::default()).unwrap();
        let mut gen_rng = RandomSource::new(3, 1);
        let out = generate(&model, 500, &mut gen_rng).unwrap();
        let out_x = out.numeric(0).unwrap();
        for v in out_x {
            assert!(x.contains(v), "{v} not in training support");
        }
    }

    #[test]
    fn model_serialization_round_trip_preserves_generation() {
        let model = fit(&vehicle_color_table(), &FitConfig::default()).unwrap();
        let json = model.to_json_string();
        assert!(json.contains(MODEL_FORMAT_VERSION));
        let loaded = SynthModel::from_json_str(&json).unwrap();
        assert_eq!(model, loaded);
        let mut r1 = RandomSource::new(9, 1);
        let mut r2 = RandomSource::new(9, 1);
        assert_eq!(
            generate(&model, 10, &mut r1).unwrap(),
            generate(&loaded, 10, &mut r2).unwrap()
        );
    }

    #[test]
    fn model_file_version_is_checked() {
        let model = fit(&vehicle_color_table(), &FitConfig::default()).unwrap();
        let json = model.to_json_string().replace(MODEL_FORMAT_VERSION, "bogus/9");
        assert!(matches!(
            SynthModel::from_json_str(&json),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn student_t_config_requires_nu() {
        let bad = FitConfig { family: CopulaFamily::StudentT, nu: None, ..Default::default() };
        assert!(fit(&vehicle_color_table(), &bad).is_err());
        let good = FitConfig {
            family: CopulaFamily::StudentT,
            nu: Some(4.0),
            ..Default::default()
        };
        let model = fit(&vehicle_color_table(), &good).unwrap();
        assert_eq!(model.copula().nu, Some(4.0));
    }

    #[test]
    fn student_t_fitting_is_kendall_only() {
        let spearman_t = FitConfig {
            family: CopulaFamily::StudentT,
            nu: Some(4.0),
            method: CorrelationFitMethod::SpearmanApprox,
            ..Default::default()
        };
        assert!(matches!(
            fit(&vehicle_color_table(), &spearman_t),
            Err(Error::Domain(_))
        ));
        // Gaussian remains free to use any estimator.
        let spearman_gauss = FitConfig {
            method: CorrelationFitMethod::SpearmanApprox,
            ..Default::default()
        };
        assert!(fit(&vehicle_color_table(), &spearman_gauss).is_ok());
    }
}
