//! Label vocabularies, label embeddings, pixel-text similarity and the argmax label map.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{Raster, Tensor3};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VocabKind {
    Category,
    Color,
}

/// Ordered, unique label strings. For categories, index 0 is the floor/background label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    labels: Vec<String>,
    kind: VocabKind,
}

impl Vocabulary {
    pub fn new(labels: Vec<String>, kind: VocabKind) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::invalid("vocabulary", "must not be empty"));
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if l.trim().is_empty() {
                return Err(Error::invalid("vocabulary", "labels must be non-blank"));
            }
            if !seen.insert(l.as_str()) {
                return Err(Error::invalid("vocabulary", format!("duplicate label {l:?}")));
            }
        }
        Ok(Self { labels, kind })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn kind(&self) -> VocabKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<u32> {
        self.labels.iter().position(|l| l == label).map(|i| i as u32)
    }

    pub fn label(&self, index: u32) -> Option<&str> {
        self.labels.get(index as usize).map(String::as_str)
    }
}

/// `N × C` label embedding matrix with unit rows, in vocabulary order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelEmbeddings<T> {
    rows: usize,
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> LabelEmbeddings<T> {
    /// Validates shape and values against `vocab` and L2-normalizes every row.
    pub fn load(vocab: &Vocabulary, rows: usize, dim: usize, data: Vec<T>) -> Result<Self> {
        if rows != vocab.len() {
            return Err(Error::mismatch("label embedding rows", vocab.len(), rows));
        }
        if dim == 0 || data.len() != rows * dim {
            return Err(Error::mismatch("label embedding values", rows * dim.max(1), data.len()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("label embeddings".into()));
        }
        let mut data = data;
        for (i, row) in data.chunks_mut(dim).enumerate() {
            let norm = row.iter().map(|v| *v * *v).sum::<T>().sqrt();
            if !(norm > T::zero()) {
                return Err(Error::invalid(
                    "label embeddings",
                    format!("row {i} ({:?}) has zero norm", vocab.labels()[i]),
                ));
            }
            row.iter_mut().for_each(|v| *v = *v / norm);
        }
        Ok(Self { rows, dim, data })
    }

    pub fn from_tensor(vocab: &Vocabulary, tensor: Tensor3<T>) -> Result<Self> {
        let (r, c, ch) = tensor.dims();
        if c != 1 {
            return Err(Error::mismatch("label embedding tensor columns", 1, c));
        }
        Self::load(vocab, r, ch, tensor.into_vec())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn to_tensor(&self) -> Tensor3<T> {
        Tensor3::from_vec(self.rows, 1, self.dim, self.data.clone()).expect("consistent shape")
    }
}

/// Pixel-text similarity `P[i,j,k] = ⟨M[i,j,·], E[k,·]⟩`; all-zero cells give all-zero rows.
pub fn similarity<T: Scalar>(
    map_embedding: &Tensor3<T>,
    labels: &LabelEmbeddings<T>,
) -> Result<Tensor3<T>> {
    let (h, w, c) = map_embedding.dims();
    if c != labels.dim() {
        return Err(Error::mismatch("embedding dimension", labels.dim(), c));
    }
    let n = labels.rows();
    let mut out = Vec::with_capacity(h * w * n);
    for cell in map_embedding.as_slice().chunks(c) {
        for k in 0..n {
            let e = labels.row(k);
            out.push(cell.iter().zip(e).map(|(a, b)| *a * *b).sum());
        }
    }
    Ok(Tensor3::from_vec(h, w, n, out).expect("consistent shape"))
}

/// Per-cell label indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PixelLabelMap {
    labels: Raster<u32>,
}

impl PixelLabelMap {
    pub fn from_labels(labels: Raster<u32>) -> Self {
        Self { labels }
    }

    pub fn labels(&self) -> &Raster<u32> {
        &self.labels
    }

    pub fn into_labels(self) -> Raster<u32> {
        self.labels
    }
}

/// Index of the maximum of `scores`, smallest index on ties.
pub fn argmax<T: PartialOrd + Copy>(scores: &[T]) -> usize {
    let mut best = 0;
    for (i, v) in scores.iter().enumerate().skip(1) {
        if *v > scores[best] {
            best = i;
        }
    }
    best
}

/// Argmax over the last axis of `P`, smallest index on ties.
pub fn pixel_label_map<T: Scalar>(similarity: &Tensor3<T>) -> PixelLabelMap {
    let (h, w, n) = similarity.dims();
    let labels: Vec<u32> = if n == 0 {
        vec![0; h * w]
    } else {
        similarity
            .as_slice()
            .chunks(n)
            .map(|row| argmax(row) as u32)
            .collect()
    };
    PixelLabelMap {
        labels: Raster::from_vec(h, w, labels).expect("consistent shape"),
    }
}

/// Convenience: `pixel_label_map(similarity(M, E))`.
pub fn label_map<T: Scalar>(
    map_embedding: &Tensor3<T>,
    labels: &LabelEmbeddings<T>,
) -> Result<PixelLabelMap> {
    Ok(pixel_label_map(&similarity(map_embedding, labels)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab(n: usize) -> Vocabulary {
        Vocabulary::new((0..n).map(|i| format!("l{i}")).collect(), VocabKind::Category).unwrap()
    }

    fn one_hot(n: usize, c: usize) -> Vec<f64> {
        let mut v = vec![0.0; n * c];
        for i in 0..n {
            v[i * c + i] = 1.0;
        }
        v
    }

    #[test]
    fn vocabulary_rules() {
        assert!(Vocabulary::new(vec![], VocabKind::Color).is_err());
        assert!(Vocabulary::new(vec!["a".into(), "a".into()], VocabKind::Color).is_err());
        let v = vocab(3);
        assert_eq!(v.index_of("l2"), Some(2));
        assert_eq!(v.label(1), Some("l1"));
        assert_eq!(v.index_of("zzz"), None);
    }

    #[test]
    fn one_hot_rows_load_as_unit_rows() {
        let e = LabelEmbeddings::load(&vocab(3), 3, 4, one_hot(3, 4)).unwrap();
        for i in 0..3 {
            let n: f64 = e.row(i).iter().map(|v| v * v).sum();
            assert_eq!(n, 1.0);
            assert_eq!(e.row(i)[i], 1.0);
        }
        let scaled = LabelEmbeddings::load(&vocab(1), 1, 2, vec![3.0, 4.0]).unwrap();
        assert_eq!(scaled.row(0), &[0.6, 0.8]);
    }

    #[test]
    fn label_embedding_errors() {
        let mut z = one_hot(3, 4);
        z[4 + 1] = 0.0;
        assert!(LabelEmbeddings::load(&vocab(3), 3, 4, z).is_err());
        assert!(matches!(
            LabelEmbeddings::load(&vocab(3), 2, 4, one_hot(2, 4)),
            Err(Error::DimensionMismatch { .. })
        ));
        let mut nan = one_hot(3, 4);
        nan[0] = f64::NAN;
        assert!(LabelEmbeddings::load(&vocab(3), 3, 4, nan).is_err());
    }

    #[test]
    fn similarity_examples() {
        let e = LabelEmbeddings::load(&vocab(3), 3, 3, one_hot(3, 3)).unwrap();
        let norm = (0.6f64 * 0.6 + 0.8 * 0.8).sqrt();
        let cells = vec![
            0.0, 1.0, 0.0, // exactly E[1]
            0.6 / norm, 0.8 / norm, 0.0, // mixed
            0.0, 0.0, 0.0, // unobserved
        ];
        let m = Tensor3::from_vec(1, 3, 3, cells).unwrap();
        let p = similarity(&m, &e).unwrap();
        assert_eq!(p.pixel((0, 0)), &[0.0, 1.0, 0.0]);
        assert_eq!(p.pixel((0, 1)), &[0.6 / norm, 0.8 / norm, 0.0]);
        assert_eq!(p.pixel((0, 2)), &[0.0, 0.0, 0.0]);
        let labels = pixel_label_map(&p);
        assert_eq!(labels.labels().as_slice(), &[1, 1, 0]);
        let bad = Tensor3::from_vec(1, 1, 2, vec![0.0, 1.0]).unwrap();
        assert!(similarity(&bad, &e).is_err());
    }

    #[test]
    fn argmax_tie_rule() {
        assert_eq!(argmax(&[0.1, 0.9, 0.3]), 1);
        assert_eq!(argmax(&[0.5, 0.5, 0.2]), 0);
        assert_eq!(argmax(&[0.2, 0.5, 0.5]), 1);
        assert_eq!(argmax(&[0.0, 0.0]), 0);
    }

    #[test]
    fn planted_one_hot_labels_are_recovered() {
        let (h, w, n) = (6, 7, 4);
        let e = LabelEmbeddings::load(&vocab(n), n, n, one_hot(n, n)).unwrap();
        let truth = Raster::from_fn(h, w, |(r, c)| ((r * 3 + c * 5) % n) as u32);
        let mut data = Vec::new();
        for &l in truth.as_slice() {
            let mut v = vec![0.0; n];
            v[l as usize] = 1.0;
            data.extend(v);
        }
        let m = Tensor3::from_vec(h, w, n, data).unwrap();
        assert_eq!(label_map(&m, &e).unwrap().labels(), &truth);
    }
}
