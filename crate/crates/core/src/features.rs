//! Feature matrices produced by an external extractor: binary and CSV I/O,
//! min-max normalization and MaskedFeature.

use std::fs;
use std::io;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::masking::{apply_mask_features, generate_mask_plan, MaskParams, MaskPlan};

pub const SAFM_MAGIC: &[u8; 4] = b"SAFM";
pub const SAFM_VERSION: u16 = 1;
const HEADER_LEN: usize = 16;

/// Row-major `T x D` matrix: rows are time steps, columns feature
/// dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f32>,
}

impl FeatureMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f32>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::ShapeError(format!(
                "matrix must be at least 1x1, got {rows}x{cols}"
            )));
        }
        if values.len() != rows * cols {
            return Err(Error::ShapeError(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::FormatError(format!("entry {i} is not finite")));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn from_rows(rows: &[Vec<f32>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().position(|r| r.len() != cols) {
            return Err(Error::ShapeError(format!(
                "row {r} has {} columns, expected {cols}",
                rows[r].len()
            )));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f32] {
        &mut self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f32 {
        self.values[row * self.cols + col]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().map(|&v| v as f64).sum::<f64>() / self.values.len() as f64
    }

    fn min_max(values: impl Iterator<Item = f32>) -> (f32, f32) {
        values.fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        })
    }
}

/// Binary layout: `SAFM`, version u16, rows u32, cols u32, two reserved zero
/// bytes, then row-major little-endian f32.
pub fn encode_safm(features: &FeatureMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * features.values.len());
    out.extend_from_slice(SAFM_MAGIC);
    out.extend_from_slice(&SAFM_VERSION.to_le_bytes());
    out.extend_from_slice(&(features.rows as u32).to_le_bytes());
    out.extend_from_slice(&(features.cols as u32).to_le_bytes());
    out.extend_from_slice(&[0, 0]);
    for v in &features.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_safm(bytes: &[u8]) -> Result<FeatureMatrix> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::FormatError(format!(
            "{} bytes is shorter than the {HEADER_LEN}-byte header",
            bytes.len()
        )));
    }
    if &bytes[..4] != SAFM_MAGIC {
        return Err(Error::FormatError("bad magic, expected SAFM".into()));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != SAFM_VERSION {
        return Err(Error::FormatError(format!("unsupported version {version}")));
    }
    let rows = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[10..14].try_into().unwrap()) as usize;
    let payload = &bytes[HEADER_LEN..];
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::ShapeError(format!("{rows}x{cols} overflows")))?;
    if payload.len() != expected {
        return Err(Error::ShapeError(format!(
            "header declares {rows}x{cols} ({} values) but payload holds {} bytes",
            rows * cols,
            payload.len()
        )));
    }
    let values = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    FeatureMatrix::new(rows, cols, values)
}

/// Parses comma-separated rows; blank lines are skipped.
pub fn parse_csv(text: &str) -> Result<FeatureMatrix> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| {
                f.trim().parse::<f32>().map_err(|e| {
                    Error::FormatError(format!("line {}: `{}`: {e}", lineno + 1, f.trim()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    FeatureMatrix::from_rows(&rows)
}

pub fn to_csv(features: &FeatureMatrix) -> String {
    let mut out = String::new();
    for r in features.values.chunks(features.cols) {
        let row: Vec<String> = r.iter().map(|v| v.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn is_csv(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Loads `.csv` as text and anything else as binary SAFM.
pub fn load_features(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    if is_csv(path) {
        let text = String::from_utf8(bytes)
            .map_err(|e| Error::FormatError(format!("CSV is not UTF-8: {e}")))?;
        parse_csv(&text)
    } else {
        decode_safm(&bytes)
    }
}

pub fn save_features(features: &FeatureMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if is_csv(path) {
        fs::write(path, to_csv(features))?;
    } else {
        fs::write(path, encode_safm(features))?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizeMode {
    /// One min/max over the whole matrix.
    #[default]
    Global,
    /// Separate min/max per feature dimension (column).
    PerDimension,
}

/// Affine map of the whole matrix onto [-1, 1]; a constant matrix maps to 0.
pub fn normalize_features(features: &FeatureMatrix) -> FeatureMatrix {
    normalize_features_with(features, NormalizeMode::Global)
}

pub fn normalize_features_with(features: &FeatureMatrix, mode: NormalizeMode) -> FeatureMatrix {
    let mut out = features.clone();
    match mode {
        NormalizeMode::Global => {
            let (lo, hi) = FeatureMatrix::min_max(features.values.iter().copied());
            out.values
                .iter_mut()
                .for_each(|v| *v = scale_to_unit(*v, lo, hi));
        }
        NormalizeMode::PerDimension => {
            let cols = features.cols;
            for c in 0..cols {
                let column = features.values.iter().skip(c).step_by(cols).copied();
                let (lo, hi) = FeatureMatrix::min_max(column);
                out.values
                    .iter_mut()
                    .skip(c)
                    .step_by(cols)
                    .for_each(|v| *v = scale_to_unit(*v, lo, hi));
            }
        }
    }
    out
}

fn scale_to_unit(v: f32, lo: f32, hi: f32) -> f32 {
    if hi == lo {
        return 0.0;
    }
    let (v, lo, hi) = (v as f64, lo as f64, hi as f64);
    (2.0 * (v - lo) / (hi - lo) - 1.0) as f32
}

#[derive(Debug, Clone)]
pub struct MaskedFeatureOutcome {
    pub features: FeatureMatrix,
    pub plan: MaskPlan,
    pub fill: f32,
}

/// Occludes patches of the matrix with its global mean.
pub fn masked_feature_augment<R: Rng + ?Sized>(
    features: &FeatureMatrix,
    params: &MaskParams,
    rng: &mut R,
) -> Result<FeatureMatrix> {
    masked_feature_augment_with_plan(features, params, rng).map(|o| o.features)
}

pub fn masked_feature_augment_with_plan<R: Rng + ?Sized>(
    features: &FeatureMatrix,
    params: &MaskParams,
    rng: &mut R,
) -> Result<MaskedFeatureOutcome> {
    let fill = features.mean() as f32;
    let plan = generate_mask_plan(params, features.dims(), rng)?;
    let features = apply_mask_features(features, &plan, fill)?;
    Ok(MaskedFeatureOutcome {
        features,
        plan,
        fill,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::masking::{MaskShape, Patch};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn seq(rows: usize, cols: usize) -> FeatureMatrix {
        FeatureMatrix::new(rows, cols, (1..=rows * cols).map(|v| v as f32).collect()).unwrap()
    }

    #[test]
    fn safm_round_trip_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.safm");
        let vals: Vec<f32> = (0..21).map(|i| (i as f32 * 0.37).sin() * 1e3).collect();
        let fm = FeatureMatrix::new(7, 3, vals).unwrap();
        save_features(&fm, &p).unwrap();
        let back = load_features(&p).unwrap();
        assert_eq!(back.dims(), (7, 3));
        let bits = |m: &FeatureMatrix| m.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back), bits(&fm));
        assert_eq!(std::fs::metadata(&p).unwrap().len(), 16 + 21 * 4);
    }

    #[test]
    fn short_payload_is_shape_error() {
        let mut bytes = encode_safm(&FeatureMatrix::new(3, 4, vec![0.0; 12]).unwrap());
        bytes[6..10].copy_from_slice(&4u32.to_le_bytes());
        assert!(matches!(decode_safm(&bytes), Err(Error::ShapeError(_))));
    }

    #[test]
    fn bad_magic_and_version() {
        let mut bytes = encode_safm(&seq(2, 2));
        bytes[0] = b'X';
        assert!(matches!(decode_safm(&bytes), Err(Error::FormatError(_))));
        let mut bytes = encode_safm(&seq(2, 2));
        bytes[4] = 9;
        assert!(matches!(decode_safm(&bytes), Err(Error::FormatError(_))));
        assert!(matches!(decode_safm(b"SAF"), Err(Error::FormatError(_))));
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            load_features("/nope/x.safm"),
            Err(Error::FileNotFound(_))
        ));
    }

    #[test]
    fn csv_literal() {
        let fm = parse_csv("1.0,2.0\n3.0,4.0").unwrap();
        assert_eq!(fm.dims(), (2, 2));
        assert_eq!(fm.values(), &[1.0, 2.0, 3.0, 4.0]);
        assert!(matches!(parse_csv("1,2\n3"), Err(Error::ShapeError(_))));
        assert!(matches!(parse_csv("1,x"), Err(Error::FormatError(_))));
        assert!(matches!(parse_csv(""), Err(Error::ShapeError(_))));
        assert_eq!(parse_csv(&to_csv(&seq(3, 2))).unwrap(), seq(3, 2));
    }

    #[test]
    fn normalize_hand_values() {
        let fm = FeatureMatrix::new(1, 3, vec![-2.0, 6.0, 2.0]).unwrap();
        assert_eq!(normalize_features(&fm).values(), &[-1.0, 1.0, 0.0]);
    }

    #[test]
    fn normalize_constant() {
        let fm = FeatureMatrix::new(2, 2, vec![4.5; 4]).unwrap();
        assert!(normalize_features(&fm).values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn normalize_idempotent() {
        let fm = FeatureMatrix::new(2, 3, vec![0.3, -7.0, 2.2, 9.1, 1.0, 4.4]).unwrap();
        let once = normalize_features(&fm);
        let twice = normalize_features(&once);
        for (a, b) in once.values().iter().zip(twice.values()) {
            assert!((a - b).abs() as f64 <= 1e-12 + f32::EPSILON as f64);
        }
    }

    #[test]
    fn per_dimension_mode() {
        let fm = FeatureMatrix::new(2, 2, vec![0.0, 10.0, 1.0, 30.0]).unwrap();
        let out = normalize_features_with(&fm, NormalizeMode::PerDimension);
        assert_eq!(out.values(), &[-1.0, -1.0, 1.0, 1.0]);
    }

    #[test]
    fn masked_feature_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let fm = seq(4, 4);
        let p = MaskParams::new(MaskShape::Bands).with_patch_count(0, 0);
        assert_eq!(masked_feature_augment(&fm, &p, &mut rng).unwrap(), fm);

        let ones = FeatureMatrix::new(6, 8, vec![1.0; 48]).unwrap();
        let p = MaskParams::new(MaskShape::Squares);
        assert_eq!(masked_feature_augment(&ones, &p, &mut rng).unwrap(), ones);

        assert_eq!(fm.mean(), 8.5);
        let plan = MaskPlan::new((4, 4), vec![Patch::Square { t0: 0, t1: 1, k0: 0, k1: 1 }]).unwrap();
        let out = apply_mask_features(&fm, &plan, fm.mean() as f32).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                let expected = if r < 2 && c < 2 { 8.5 } else { fm.get(r, c) };
                assert_eq!(out.get(r, c), expected);
            }
        }
    }

    fn matrix_strategy() -> impl Strategy<Value = FeatureMatrix> {
        (1usize..8, 1usize..8).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-1e3f32..1e3, r * c)
                .prop_map(move |v| FeatureMatrix::new(r, c, v).unwrap())
        })
    }

    proptest! {
        #[test]
        fn normalize_range_and_order(fm in matrix_strategy()) {
            let out = normalize_features(&fm);
            prop_assert_eq!(out.dims(), fm.dims());
            let v = fm.values();
            let o = out.values();
            prop_assert!(o.iter().all(|x| (-1.0..=1.0).contains(x)));
            let (lo, hi) = FeatureMatrix::min_max(v.iter().copied());
            if hi > lo {
                for i in 0..v.len() {
                    if v[i] == lo { prop_assert_eq!(o[i], -1.0); }
                    if v[i] == hi { prop_assert_eq!(o[i], 1.0); }
                    for j in 0..v.len() {
                        if v[i] < v[j] { prop_assert!(o[i] <= o[j]); }
                    }
                }
            }
        }

        #[test]
        fn safm_round_trip(fm in matrix_strategy()) {
            prop_assert_eq!(decode_safm(&encode_safm(&fm)).unwrap(), fm);
        }

        #[test]
        fn masked_feature_outside_unchanged(fm in matrix_strategy(), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let o = masked_feature_augment_with_plan(&fm, &MaskParams::new(MaskShape::Squares), &mut rng).unwrap();
            let hard = o.plan.hard_cells();
            for (i, &h) in hard.iter().enumerate() {
                let expected = if h { o.fill } else { fm.values()[i] };
                prop_assert_eq!(o.features.values()[i], expected);
            }
        }
    }
}
